/*
 * Copyright (c) esgsim authors
 *
 * This source code is licensed under the Apache 2.0 license found in the
 * LICENSE file in the root directory of this source tree.
 */
#pragma once

#include <cassert>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "esg/model.hpp"

// End-to-end SLO distribution over a workflow DAG:
//   1. build the dominator tree of the DAG,
//   2. label every function with its average normalized latency (ANL),
//   3. reduce parallel branches bottom-up into synthetic nodes and partition
//      the resulting chains into groups of at most g consecutive functions,
//   4. split the SLO across groups proportionally to ANL, reversing the
//      reduction so that each parallel branch receives the full quota of the
//      synthetic node that subsumed it.
// The output quotas conserve the SLO along every entry-to-exit path as long
// as no branch of a split is empty (no shortcut edge around a branch body).

namespace esg {

struct DominatorTree {
    std::string root;
    std::map<std::string, std::string> parent;                 // immediate dominator; root maps to itself
    std::map<std::string, std::vector<std::string>> children;  // sorted by id
    std::vector<std::string> postorder;                        // children before parents
};

// Iterative dominator computation over a topological order. For an acyclic
// graph one pass reaches the fixpoint because all predecessors of a node are
// finalized before the node itself.
inline DominatorTree build_dominator_tree(const ApplicationDag& dag) {
    validate_dag(dag);
    auto order = topo_order(dag);
    auto adj = adjacency(dag);
    std::map<std::string, int> pos;
    for (size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);

    DominatorTree t;
    t.root = order.front();
    t.parent[t.root] = t.root;

    auto intersect = [&](std::string a, std::string b) {
        while (a != b) {
            while (pos.at(a) > pos.at(b)) a = t.parent.at(a);
            while (pos.at(b) > pos.at(a)) b = t.parent.at(b);
        }
        return a;
    };

    for (size_t i = 1; i < order.size(); ++i) {
        const std::string& n = order[i];
        std::string idom;
        for (const auto& p : adj.preds.at(n)) {
            if (!t.parent.count(p)) continue;
            idom = idom.empty() ? p : intersect(idom, p);
        }
        assert(!idom.empty());
        t.parent[n] = idom;
    }

    for (const auto& n : dag.nodes) t.children[n];
    for (const auto& [n, p] : t.parent)
        if (n != p) t.children.at(p).push_back(n);
    for (auto& [_, c] : t.children) std::sort(c.begin(), c.end());

    // post-order: children before parents, children visited in id order
    std::vector<std::pair<std::string, bool>> stack{{t.root, false}};
    while (!stack.empty()) {
        auto [n, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            t.postorder.push_back(n);
            continue;
        }
        stack.push_back({n, true});
        const auto& kids = t.children.at(n);
        for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back({*it, false});
    }
    return t;
}

// ANL of function i: mean over the shared configuration grid of
// t_i(c) / sum_j t_j(c), i.e. the share of the workflow's latency this
// function is responsible for, averaged over configurations.
inline std::map<std::string, double> label_anl(const ApplicationDag& dag, const ProfileTable& profiles) {
    validate_dag(dag);
    const auto& ref_view = profiles.sorted_view(dag.nodes.front());
    if (ref_view.empty()) throw std::invalid_argument("label_anl: empty profile view");
    std::map<std::string, double> anl;
    for (const auto& n : dag.nodes) anl[n] = 0.0;
    for (const auto& entry : ref_view) {
        double denom = 0.0;
        for (const auto& n : dag.nodes) denom += profiles.exec_ms(n, entry.cfg);
        for (const auto& n : dag.nodes) anl.at(n) += profiles.exec_ms(n, entry.cfg) / denom;
    }
    for (auto& [_, v] : anl) v /= static_cast<double>(ref_view.size());
    return anl;
}

// A node of the reduced dominator tree. Either one original function (leaf)
// or a synthetic node standing in for a set of parallel branches, each branch
// already partitioned into groups. Irreducible regions collapse into a
// synthetic node with a single branch holding a single group (tangle).
struct UnitGroup;
struct ReducedUnit {
    double anl = 0.0;
    std::string fn;                                // set iff leaf
    std::vector<std::vector<UnitGroup>> branches;  // set iff synthetic
    bool tangle = false;
    bool leaf() const { return branches.empty(); }
};

struct UnitGroup {
    double anl = 0.0;
    std::vector<ReducedUnit> units;
};

using ReducedChain = std::vector<ReducedUnit>;

// Partition a chain into groups of at most g consecutive original nodes.
// Synthetic nodes stay individual so the groups they subsume keep their own
// quotas instead of being folded into a neighboring group.
inline std::vector<UnitGroup> slo_group(ReducedChain chain, int g) {
    if (g < 1) throw std::invalid_argument("slo_group: max group size must be >= 1");
    std::vector<UnitGroup> out;
    UnitGroup cur;
    auto flush = [&] {
        if (!cur.units.empty()) {
            out.push_back(std::move(cur));
            cur = UnitGroup{};
        }
    };
    for (auto& u : chain) {
        if (!u.leaf()) {
            flush();
            UnitGroup solo;
            solo.anl = u.anl;
            solo.units.push_back(std::move(u));
            out.push_back(std::move(solo));
        } else {
            if (static_cast<int>(cur.units.size()) == g) flush();
            cur.anl += u.anl;
            cur.units.push_back(std::move(u));
        }
    }
    flush();
    return out;
}

struct ReducedPlan {
    std::vector<UnitGroup> top;  // the fully reduced chain, grouped
    int max_group_size = 3;
};

namespace detail {

// One vertex of the chunk graph built among the dominator-tree children of a
// split node: a reduced chain plus its neighbor sets. id 0 is the split node
// itself (the source); stable_id keeps merges deterministic.
struct ChunkItem {
    ReducedChain chain;
    std::set<int> preds, succs;
    int stable_id = 0;
    bool alive = true;
};

inline double chain_anl(const ReducedChain& c) {
    double s = 0.0;
    for (const auto& u : c) s += u.anl;
    return s;
}

inline double grouped_anl(const std::vector<UnitGroup>& gs) {
    double s = 0.0;
    for (const auto& g : gs) s += g.anl;
    return s;
}

// Series-parallel reduction of the chunk graph. Returns the source item's
// chain once everything merged into it; irreducible leftovers collapse into a
// single tangle unit whose ANL is the critical path through them.
inline ReducedChain reduce_chunks(std::vector<ChunkItem>& items, int g) {
    auto alive_ids = [&] {
        std::vector<int> ids;
        for (size_t i = 0; i < items.size(); ++i)
            if (items[i].alive) ids.push_back(static_cast<int>(i));
        return ids;
    };
    auto redirect = [&](int from, int to) {
        // rewrite every reference to `from` as `to`
        for (auto& it : items) {
            if (!it.alive) continue;
            if (it.preds.erase(from)) it.preds.insert(to);
            if (it.succs.erase(from)) it.succs.insert(to);
        }
    };

    for (;;) {
        bool changed = false;

        // parallel: items sharing both neighbor sets merge into one synthetic
        std::map<std::pair<std::vector<int>, std::vector<int>>, std::vector<int>> sig;
        for (int i : alive_ids()) {
            if (i == 0) continue;
            std::vector<int> p(items[i].preds.begin(), items[i].preds.end());
            std::vector<int> s(items[i].succs.begin(), items[i].succs.end());
            sig[{p, s}].push_back(i);
        }
        for (auto& [_, group] : sig) {
            if (group.size() < 2) continue;
            std::sort(group.begin(), group.end(),
                      [&](int a, int b) { return items[a].stable_id < items[b].stable_id; });
            ReducedUnit syn;
            for (int i : group) {
                auto grouped = slo_group(std::move(items[i].chain), g);
                syn.anl = std::max(syn.anl, grouped_anl(grouped));
                syn.branches.push_back(std::move(grouped));
            }
            int keep = group.front();
            for (size_t k = 1; k < group.size(); ++k) {
                items[group[k]].alive = false;
                redirect(group[k], keep);
            }
            items[keep].chain.clear();
            items[keep].chain.push_back(std::move(syn));
            items[keep].preds.erase(keep);
            items[keep].succs.erase(keep);
            changed = true;
            break;  // adjacency changed; recompute signatures
        }
        if (changed) continue;

        // series: unique successor with a unique predecessor concatenates
        for (int i : alive_ids()) {
            if (items[i].succs.size() != 1) continue;
            int j = *items[i].succs.begin();
            if (j == 0 || !items[j].alive || items[j].preds.size() != 1) continue;
            assert(*items[j].preds.begin() == i);
            for (auto& u : items[j].chain) items[i].chain.push_back(std::move(u));
            items[i].succs = items[j].succs;
            items[j].alive = false;
            redirect(j, i);
            items[i].preds.erase(i);
            items[i].succs.erase(i);
            changed = true;
            break;
        }
        if (changed) continue;

        // shortcut edge parallel to a single-neighbor item: the item becomes
        // a synthetic node with one empty branch and the edge is dropped
        for (int i : alive_ids()) {
            if (i == 0 || items[i].preds.size() != 1 || items[i].succs.size() != 1) continue;
            int u = *items[i].preds.begin();
            int w = *items[i].succs.begin();
            if (!items[u].succs.count(w)) continue;
            ReducedUnit syn;
            auto grouped = slo_group(std::move(items[i].chain), g);
            syn.anl = grouped_anl(grouped);
            syn.branches.push_back(std::move(grouped));
            syn.branches.push_back({});  // the shortcut is an empty branch
            items[i].chain.clear();
            items[i].chain.push_back(std::move(syn));
            items[u].succs.erase(w);
            items[w].preds.erase(u);
            changed = true;
            break;
        }
        if (changed) continue;

        auto ids = alive_ids();
        if (ids.size() == 1) {
            assert(ids[0] == 0);
            return std::move(items[0].chain);
        }

        // irreducible: collapse everything but the source into one tangle
        // whose ANL is the critical path over the remaining items
        std::vector<int> rest;
        for (int i : ids)
            if (i != 0) rest.push_back(i);
        std::sort(rest.begin(), rest.end(),
                  [&](int a, int b) { return items[a].stable_id < items[b].stable_id; });
        std::map<int, double> cp;
        std::map<int, int> indeg;
        for (int i : rest) {
            int d = 0;
            for (int p : items[i].preds)
                if (p != 0) ++d;
            indeg[i] = d;
        }
        std::vector<int> topo;
        for (;;) {
            int pick = -1;
            for (int i : rest) {
                if (indeg.at(i) == 0 && !cp.count(i)) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) break;
            double best = 0.0;
            for (int p : items[pick].preds)
                if (p != 0 && cp.count(p)) best = std::max(best, cp.at(p));
            cp[pick] = best + chain_anl(items[pick].chain);
            for (int s : items[pick].succs)
                if (s != 0) --indeg.at(s);
            topo.push_back(pick);
        }
        assert(topo.size() == rest.size());
        UnitGroup bundle;
        for (int i : topo) {
            for (auto& u : items[i].chain) bundle.units.push_back(std::move(u));
            bundle.anl = std::max(bundle.anl, cp.at(i));
        }
        ReducedUnit syn;
        syn.anl = bundle.anl;
        syn.tangle = true;
        syn.branches.push_back({std::move(bundle)});
        ReducedChain out = std::move(items[0].chain);
        out.push_back(std::move(syn));
        return out;
    }
}

inline ReducedChain reduce_node(const std::string& x, const ApplicationDag& dag, const DominatorTree& tree,
                                const std::map<std::string, double>& anl, int g) {
    const auto& kids = tree.children.at(x);
    ReducedUnit self;
    self.fn = x;
    self.anl = anl.at(x);
    if (kids.empty()) return {std::move(self)};
    if (kids.size() == 1) {
        ReducedChain rest = reduce_node(kids[0], dag, tree, anl, g);
        ReducedChain out{std::move(self)};
        for (auto& u : rest) out.push_back(std::move(u));
        return out;
    }

    // map every node under x to the child subtree owning it
    std::map<std::string, int> owner;  // node -> item index (1-based; 0 is x)
    for (size_t k = 0; k < kids.size(); ++k) {
        std::vector<std::string> stack{kids[k]};
        while (!stack.empty()) {
            std::string n = stack.back();
            stack.pop_back();
            owner[n] = static_cast<int>(k) + 1;
            for (const auto& c : tree.children.at(n)) stack.push_back(c);
        }
    }

    std::vector<detail::ChunkItem> items(kids.size() + 1);
    items[0].chain.push_back(std::move(self));
    items[0].stable_id = 0;
    for (size_t k = 0; k < kids.size(); ++k) {
        items[k + 1].chain = reduce_node(kids[k], dag, tree, anl, g);
        items[k + 1].stable_id = static_cast<int>(k) + 1;
    }
    for (const auto& [u, v] : dag.edges) {
        auto vo = owner.find(v);
        if (vo == owner.end()) continue;
        // only edges that land on a child head are chunk edges
        bool v_is_head = std::find(kids.begin(), kids.end(), v) != kids.end();
        if (!v_is_head) continue;
        int src;
        if (u == x) {
            src = 0;
        } else {
            auto uo = owner.find(u);
            if (uo == owner.end()) continue;  // edge entering from outside this subtree level
            src = uo->second;
        }
        int dst = vo->second;
        if (src == dst) continue;
        items[src].succs.insert(dst);
        items[dst].preds.insert(src);
    }
    return reduce_chunks(items, g);
}

}  // namespace detail

inline void validate_labels(const ApplicationDag& dag, const std::map<std::string, double>& anl) {
    double total = 0.0;
    for (const auto& n : dag.nodes) {
        auto it = anl.find(n);
        if (it == anl.end()) throw std::invalid_argument("degenerate ANL labels: missing label for " + n);
        if (!(it->second > 0.0)) throw std::invalid_argument("degenerate ANL labels: nonpositive label for " + n);
        total += it->second;
    }
    if (!(total > 0.0)) throw std::invalid_argument("degenerate ANL labels");
}

inline ReducedPlan reduce_and_group(const ApplicationDag& dag, const DominatorTree& tree,
                                    const std::map<std::string, double>& anl, int max_group_size) {
    validate_labels(dag, anl);
    ReducedChain chain = detail::reduce_node(tree.root, dag, tree, anl, max_group_size);
    ReducedPlan plan;
    plan.max_group_size = max_group_size;
    plan.top = slo_group(std::move(chain), max_group_size);
    return plan;
}

// A schedulable group: consecutive functions of one reduced chain, its share
// of the end-to-end SLO, and the resulting absolute quota.
struct FunctionGroup {
    std::vector<std::string> fns;
    double anl = 0.0;
    double ratio = 0.0;
    double quota_ms = 0.0;
};

struct GroupPlan {
    std::vector<FunctionGroup> groups;
    std::map<std::string, int> group_of;  // function id -> index into groups
    int max_group_size = 3;
    double slo_ms = 0.0;
};

namespace detail {

inline void collect_fns(const ReducedUnit& u, std::vector<std::string>& out) {
    if (u.leaf()) {
        out.push_back(u.fn);
        return;
    }
    for (const auto& br : u.branches)
        for (const auto& grp : br)
            for (const auto& unit : grp.units) collect_fns(unit, out);
}

inline void emit_groups(const UnitGroup& g, double ratio, GroupPlan& plan) {
    bool synthetic = g.units.size() == 1 && !g.units[0].leaf();
    if (synthetic && !g.units[0].tangle) {
        // reverse the reduction: every branch receives the full quota of the
        // synthetic node (branches run in parallel), split within the branch
        for (const auto& br : g.units[0].branches) {
            double total = grouped_anl(br);
            if (!(total > 0.0)) continue;  // empty branch (shortcut edge)
            for (const auto& sub : br) emit_groups(sub, ratio * sub.anl / total, plan);
        }
        return;
    }
    FunctionGroup out;
    out.anl = g.anl;
    out.ratio = ratio;
    for (const auto& u : g.units) collect_fns(u, out.fns);
    int idx = static_cast<int>(plan.groups.size());
    for (const auto& fn : out.fns) {
        if (plan.group_of.count(fn))
            throw std::logic_error("group plan: function " + fn + " assigned twice");
        plan.group_of[fn] = idx;
    }
    plan.groups.push_back(std::move(out));
}

}  // namespace detail

// Split slo_ms across the top-level groups proportionally to ANL, then
// recursively unfold synthetic nodes. ratio is the group's share of the
// end-to-end SLO along any path that traverses it.
inline GroupPlan distribute_slo(const ReducedPlan& reduced, double slo_ms) {
    double total = 0.0;
    for (const auto& g : reduced.top) total += g.anl;
    if (!(total > 0.0)) throw std::invalid_argument("degenerate ANL labels");
    GroupPlan plan;
    plan.max_group_size = reduced.max_group_size;
    plan.slo_ms = slo_ms;
    for (const auto& g : reduced.top) detail::emit_groups(g, g.anl / total, plan);
    for (auto& g : plan.groups) g.quota_ms = g.ratio * slo_ms;
    return plan;
}

// Convenience pipeline: dominators, ANL labels, reduction, distribution.
inline GroupPlan plan_slo_distribution(const ApplicationDag& dag, const ProfileTable& profiles,
                                       int max_group_size, double slo_ms) {
    auto tree = build_dominator_tree(dag);
    auto anl = label_anl(dag, profiles);
    auto reduced = reduce_and_group(dag, tree, anl, max_group_size);
    return distribute_slo(reduced, slo_ms);
}

}  // namespace esg
