#include "mixfg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mixfg/mixture.hpp"
#include "mixfg/nodes.hpp"

namespace mixfg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string edge_str(EdgeId e) { return "edge " + std::to_string(e.value); }
std::string node_str(NodeId n) { return "node " + std::to_string(n.value); }

// Message sent by a terminal (observed or free) edge end.
Message terminal_message(const EdgeRecord& rec) {
    if (rec.observation.has_value()) {
        return Message{0.0, *rec.observation};
    }
    // Free end: the constant-one function. Exact for discrete and simplex
    // variables; an improper Flat marker for continuous ones.
    switch (rec.kind.family) {
        case EdgeKind::Family::Discrete:
            return Message{std::log(static_cast<double>(rec.kind.cardinality)),
                           Categorical::uniform(rec.kind.cardinality)};
        case EdgeKind::Family::Simplex:
            return Message{-std::lgamma(static_cast<double>(rec.kind.cardinality)),
                           Dirichlet(std::vector<double>(rec.kind.cardinality, 1.0))};
        case EdgeKind::Family::Continuous:
        default:
            return Message{0.0, Flat{}};
    }
}

EdgeKind expected_prior_kind(const Distribution& d) {
    if (std::holds_alternative<Gaussian1D>(d) || std::holds_alternative<PointMassReal>(d) ||
        std::holds_alternative<GaussianMixture1D>(d)) {
        return EdgeKind::continuous();
    }
    if (const auto* c = std::get_if<Categorical>(&d)) {
        return EdgeKind::discrete(c->size());
    }
    if (const auto* p = std::get_if<PointMassIndex>(&d)) {
        return EdgeKind::discrete(p->cardinality);
    }
    if (const auto* dir = std::get_if<Dirichlet>(&d)) {
        return EdgeKind::simplex(dir->size());
    }
    throw GraphError("prior node carries an improper distribution");
}

} // namespace

std::size_t node_arity(const NodeKind& kind) {
    return std::visit(
        overloaded{
            [](const PriorNode&) -> std::size_t { return 1; },
            [](const GaussianLikelihood&) -> std::size_t { return 2; },
            [](const GaussianAR1&) -> std::size_t { return 2; },
            [](const TransitionNode&) -> std::size_t { return 2; },
            [](const CategoricalFromProbs&) -> std::size_t { return 2; },
            [](const EqualityNode&) -> std::size_t { return 3; },
            [](const MixtureNode& m) -> std::size_t { return m.k + 2; },
        },
        kind);
}

// ---------------------------------------------------------------------------
// Construction

void FactorGraph::require_mutable() const {
    if (validated_) {
        throw GraphError("graph is frozen after validation");
    }
}

NodeId FactorGraph::add_node(NodeKind kind) {
    require_mutable();
    const std::size_t arity = node_arity(kind);
    nodes_.push_back(std::move(kind));
    ports_.emplace_back(arity);
    return NodeId{nodes_.size() - 1};
}

void FactorGraph::bind_port(Endpoint ep, EdgeId edge) {
    auto& ports = ports_[ep.node.value];
    if (ports[ep.port].has_value()) {
        throw GraphError("port " + std::to_string(ep.port) + " of " + node_str(ep.node) +
                         " is already bound");
    }
    ports[ep.port] = edge;
}

namespace {
void check_endpoint(const std::vector<std::vector<std::optional<EdgeId>>>& ports, Endpoint ep) {
    if (ep.node.value >= ports.size()) {
        throw GraphError("endpoint names unknown " + node_str(ep.node));
    }
    if (ep.port >= ports[ep.node.value].size()) {
        throw GraphError("port " + std::to_string(ep.port) + " exceeds arity of " +
                         node_str(ep.node));
    }
}
} // namespace

EdgeId FactorGraph::add_edge(Endpoint tail, Endpoint head, EdgeKind kind) {
    require_mutable();
    check_endpoint(ports_, tail);
    check_endpoint(ports_, head);
    if (tail.node == head.node && tail.port == head.port) {
        throw GraphError("edge endpoints coincide");
    }
    const EdgeId id{edges_.size()};
    bind_port(tail, id);
    bind_port(head, id);
    edges_.push_back(EdgeRecord{tail, head, kind, std::nullopt, false});
    return id;
}

EdgeId FactorGraph::add_half_edge(Endpoint tail, EdgeKind kind) {
    require_mutable();
    check_endpoint(ports_, tail);
    const EdgeId id{edges_.size()};
    bind_port(tail, id);
    edges_.push_back(EdgeRecord{tail, std::nullopt, kind, std::nullopt, false});
    return id;
}

void FactorGraph::attach_head(EdgeId edge, Endpoint head) {
    require_mutable();
    if (edge.value >= edges_.size()) {
        throw GraphError("unknown " + edge_str(edge));
    }
    EdgeRecord& rec = edges_[edge.value];
    if (rec.head.has_value() || rec.observation.has_value()) {
        throw GraphError(edge_str(edge) + " already has two attachments");
    }
    if (rec.declared_free) {
        throw GraphError(edge_str(edge) + " was declared free");
    }
    check_endpoint(ports_, head);
    bind_port(head, edge);
    rec.head = head;
}

void FactorGraph::observe(EdgeId edge, double value) {
    require_mutable();
    if (edge.value >= edges_.size()) {
        throw GraphError("unknown " + edge_str(edge));
    }
    EdgeRecord& rec = edges_[edge.value];
    if (rec.kind.family != EdgeKind::Family::Continuous) {
        throw GraphError(edge_str(edge) + " is not continuous; observe a category instead");
    }
    if (rec.head.has_value()) {
        throw GraphError(edge_str(edge) + " is fully bound; only dangling ends can be observed");
    }
    if (rec.observation.has_value() || rec.declared_free) {
        throw GraphError(edge_str(edge) + " already has a terminal");
    }
    rec.observation = PointMassReal(value);
}

void FactorGraph::observe(EdgeId edge, std::size_t category) {
    require_mutable();
    if (edge.value >= edges_.size()) {
        throw GraphError("unknown " + edge_str(edge));
    }
    EdgeRecord& rec = edges_[edge.value];
    if (rec.kind.family != EdgeKind::Family::Discrete) {
        throw GraphError(edge_str(edge) + " is not discrete");
    }
    if (rec.head.has_value()) {
        throw GraphError(edge_str(edge) + " is fully bound; only dangling ends can be observed");
    }
    if (rec.observation.has_value() || rec.declared_free) {
        throw GraphError(edge_str(edge) + " already has a terminal");
    }
    if (category >= rec.kind.cardinality) {
        throw GraphError("observed category out of range on " + edge_str(edge));
    }
    rec.observation = PointMassIndex(category, rec.kind.cardinality);
}

void FactorGraph::mark_free(EdgeId edge) {
    require_mutable();
    if (edge.value >= edges_.size()) {
        throw GraphError("unknown " + edge_str(edge));
    }
    EdgeRecord& rec = edges_[edge.value];
    if (rec.head.has_value() || rec.observation.has_value()) {
        throw GraphError(edge_str(edge) + " has no dangling end to mark free");
    }
    rec.declared_free = true;
}

const NodeKind& FactorGraph::node(NodeId id) const {
    if (id.value >= nodes_.size()) {
        throw GraphError("unknown " + node_str(id));
    }
    return nodes_[id.value];
}

const EdgeRecord& FactorGraph::edge(EdgeId id) const {
    if (id.value >= edges_.size()) {
        throw GraphError("unknown " + edge_str(id));
    }
    return edges_[id.value];
}

EdgeId FactorGraph::port_edge(NodeId node, std::size_t port) const {
    if (node.value >= nodes_.size() || port >= ports_[node.value].size()) {
        throw GraphError("unknown port " + std::to_string(port) + " on " + node_str(node));
    }
    const auto& slot = ports_[node.value][port];
    if (!slot.has_value()) {
        throw GraphError("port " + std::to_string(port) + " of " + node_str(node) + " is unbound");
    }
    return *slot;
}

// ---------------------------------------------------------------------------
// Validation

void FactorGraph::check_edge_kinds() const {
    auto kind_of = [&](NodeId n, std::size_t port) -> const EdgeKind& {
        return edges_[ports_[n.value][port]->value].kind;
    };
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const NodeId n{i};
        std::visit(
            overloaded{
                [&](const PriorNode& p) {
                    if (!(kind_of(n, 0) == expected_prior_kind(p.dist))) {
                        throw GraphError(node_str(n) + ": prior distribution does not match its edge");
                    }
                },
                [&](const GaussianLikelihood&) {
                    if (kind_of(n, 0).family != EdgeKind::Family::Continuous ||
                        kind_of(n, 1).family != EdgeKind::Family::Continuous) {
                        throw GraphError(node_str(n) + ": likelihood ports must be continuous");
                    }
                },
                [&](const GaussianAR1&) {
                    if (kind_of(n, 0).family != EdgeKind::Family::Continuous ||
                        kind_of(n, 1).family != EdgeKind::Family::Continuous) {
                        throw GraphError(node_str(n) + ": AR1 ports must be continuous");
                    }
                },
                [&](const TransitionNode& t) {
                    const EdgeKind want = EdgeKind::discrete(t.T.size());
                    if (!(kind_of(n, 0) == want) || !(kind_of(n, 1) == want)) {
                        throw GraphError(node_str(n) + ": transition ports must be discrete(" +
                                         std::to_string(t.T.size()) + ")");
                    }
                },
                [&](const CategoricalFromProbs& c) {
                    if (!(kind_of(n, 0) == EdgeKind::simplex(c.k)) ||
                        !(kind_of(n, 1) == EdgeKind::discrete(c.k))) {
                        throw GraphError(node_str(n) +
                                         ": ports must be simplex(k) and discrete(k)");
                    }
                },
                [&](const EqualityNode&) {
                    if (!(kind_of(n, 0) == kind_of(n, 1)) || !(kind_of(n, 1) == kind_of(n, 2))) {
                        throw GraphError(node_str(n) + ": equality ports must share one kind");
                    }
                },
                [&](const MixtureNode& m) {
                    if (!(kind_of(n, 0) == EdgeKind::discrete(m.k))) {
                        throw GraphError(node_str(n) + ": selector port must be discrete(" +
                                         std::to_string(m.k) + ")");
                    }
                    const EdgeKind& out = kind_of(n, 1);
                    for (std::size_t b = 0; b < m.k; ++b) {
                        if (!(kind_of(n, 2 + b) == out)) {
                            throw GraphError(node_str(n) +
                                             ": branch ports must match the output port kind");
                        }
                    }
                },
            },
            nodes_[i]);
    }
}

void FactorGraph::validate() {
    require_mutable();
    if (nodes_.empty()) {
        throw GraphError("graph has no nodes");
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (std::size_t p = 0; p < ports_[i].size(); ++p) {
            if (!ports_[i][p].has_value()) {
                throw GraphError("port " + std::to_string(p) + " of " + node_str(NodeId{i}) +
                                 " is unbound");
            }
        }
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const EdgeRecord& rec = edges_[e];
        if (!rec.head.has_value() && !rec.observation.has_value() && !rec.declared_free) {
            throw GraphError(edge_str(EdgeId{e}) +
                             " has a dangling end; observe it, bind it, or mark it free");
        }
    }
    check_edge_kinds();

    // Acyclicity and connectivity over node-to-node edges.
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nodes_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const EdgeRecord& rec = edges_[e];
        if (!rec.head.has_value()) {
            continue;
        }
        const std::size_t a = rec.tail->node.value;
        const std::size_t b = rec.head->node.value;
        if (a == b) {
            throw GraphError(edge_str(EdgeId{e}) + " forms a self-loop; the graph must be acyclic");
        }
        adj[a].push_back({b, e});
        adj[b].push_back({a, e});
    }
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, edges_.size()}};
    seen[0] = 1;
    std::size_t visited = 0;
    while (!stack.empty()) {
        const auto [v, via] = stack.back();
        stack.pop_back();
        ++visited;
        for (const auto& [w, e] : adj[v]) {
            if (e == via) {
                continue;
            }
            if (seen[w]) {
                throw GraphError("graph contains a cycle through " + edge_str(EdgeId{e}));
            }
            seen[w] = 1;
            stack.push_back({w, e});
        }
    }
    if (visited != nodes_.size()) {
        throw GraphError("graph is disconnected");
    }
    validated_ = true;
}

// ---------------------------------------------------------------------------
// Scheduling

Schedule schedule_sweep(const FactorGraph& g) {
    if (!g.is_validated()) {
        throw GraphError("schedule_sweep requires a validated graph");
    }
    const std::size_t n = g.node_count();

    // Per node, its edges in ascending id order, with the neighbor when internal.
    struct Adj {
        EdgeId edge;
        std::optional<NodeId> other;
    };
    std::vector<std::vector<Adj>> adj(n);
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const EdgeRecord& rec = g.edge(EdgeId{e});
        if (rec.head.has_value()) {
            adj[rec.tail->node.value].push_back({EdgeId{e}, rec.head->node});
            adj[rec.head->node.value].push_back({EdgeId{e}, rec.tail->node});
        } else {
            adj[rec.tail->node.value].push_back({EdgeId{e}, std::nullopt});
        }
    }

    std::vector<std::optional<EdgeId>> parent_edge(n);
    std::vector<NodeId> preorder;
    preorder.reserve(n);
    std::vector<char> seen(n, 0);
    std::vector<NodeId> stack{NodeId{0}};
    seen[0] = 1;
    while (!stack.empty()) {
        const NodeId v = stack.back();
        stack.pop_back();
        preorder.push_back(v);
        const auto& list = adj[v.value];
        for (auto it = list.rbegin(); it != list.rend(); ++it) {
            if (it->other.has_value() && !seen[it->other->value]) {
                seen[it->other->value] = 1;
                parent_edge[it->other->value] = it->edge;
                stack.push_back(*it->other);
            }
        }
    }

    Schedule sched;
    auto emits_forward = [&](NodeId node, EdgeId edge) {
        return g.edge(edge).tail->node == node;
    };
    // Leaves to root: every non-root node sends toward its parent edge.
    for (auto it = preorder.rbegin(); it != preorder.rend(); ++it) {
        const NodeId v = *it;
        if (parent_edge[v.value].has_value()) {
            const EdgeId e = *parent_edge[v.value];
            sched.entries.push_back({v, e, emits_forward(v, e)});
        }
    }
    // Root to leaves: every node sends on its remaining ports.
    for (const NodeId v : preorder) {
        for (const Adj& a : adj[v.value]) {
            if (parent_edge[v.value].has_value() && a.edge == *parent_edge[v.value]) {
                continue;
            }
            sched.entries.push_back({v, a.edge, emits_forward(v, a.edge)});
        }
    }
    return sched;
}

// ---------------------------------------------------------------------------
// Message dispatch

Message node_message(const FactorGraph& g, NodeId node, std::size_t out_port,
                     const std::vector<const Message*>& in) {
    auto need = [&](std::size_t port) -> const Message& {
        if (port >= in.size() || in[port] == nullptr) {
            throw GraphError("missing incoming message on port " + std::to_string(port) + " of " +
                             node_str(node));
        }
        return *in[port];
    };
    return std::visit(
        overloaded{
            [&](const PriorNode& p) { return prior_message(p); },
            [&](const GaussianLikelihood& l) {
                return out_port == 1 ? gaussian_likelihood_to_y(l, need(0))
                                     : gaussian_likelihood_to_s(l, need(1));
            },
            [&](const GaussianAR1& a) {
                return out_port == 1 ? ar1_forward(a, need(0)) : ar1_backward(a, need(1));
            },
            [&](const TransitionNode& t) {
                return out_port == 1 ? transition_forward(t, need(0))
                                     : transition_backward(t, need(1));
            },
            [&](const CategoricalFromProbs& c) {
                return out_port == 1 ? categorical_from_probs_to_m(c, need(0))
                                     : categorical_from_probs_to_pi(c, need(1));
            },
            [&](const EqualityNode&) {
                const std::size_t a = out_port == 0 ? 1 : 0;
                const std::size_t b = out_port == 2 ? 1 : 2;
                return equality_message(need(a), need(b));
            },
            [&](const MixtureNode& m) {
                if (out_port == 0) {
                    std::vector<Message> branches;
                    branches.reserve(m.k);
                    for (std::size_t b = 0; b < m.k; ++b) {
                        branches.push_back(need(2 + b));
                    }
                    return mixture_message_to_m(branches, need(1));
                }
                if (out_port == 1) {
                    std::vector<Message> branches;
                    branches.reserve(m.k);
                    for (std::size_t b = 0; b < m.k; ++b) {
                        branches.push_back(need(2 + b));
                    }
                    return mixture_message_to_out(need(0), branches);
                }
                return mixture_message_to_branch(need(1));
            },
        },
        g.node(node));
}

// ---------------------------------------------------------------------------
// Inference

namespace {

// Incoming message at a node port: the message traveling toward the node.
const Message* incoming_at(const FactorGraph& g,
                           const std::vector<std::optional<Message>>& fwd,
                           const std::vector<std::optional<Message>>& bwd, NodeId node,
                           std::size_t port) {
    const EdgeId e = g.port_edge(node, port);
    const bool node_is_tail = g.edge(e).tail->node == node;
    const auto& slot = node_is_tail ? bwd[e.value] : fwd[e.value];
    return slot.has_value() ? &*slot : nullptr;
}

std::vector<bool> mark_model_conditional(const FactorGraph& g) {
    std::vector<bool> conditional(g.edge_count(), false);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto* mix = std::get_if<MixtureNode>(&g.node(NodeId{i}));
        if (mix == nullptr) {
            continue;
        }
        for (std::size_t b = 0; b < mix->k; ++b) {
            const EdgeId start = g.port_edge(NodeId{i}, 2 + b);
            conditional[start.value] = true;
            const EdgeRecord& rec = g.edge(start);
            const NodeId self{i};
            std::optional<NodeId> far;
            if (rec.tail->node == self && rec.head.has_value()) {
                far = rec.head->node;
            } else if (rec.head.has_value() && rec.head->node == self) {
                far = rec.tail->node;
            } else if (!(rec.tail->node == self)) {
                far = rec.tail->node;
            }
            if (!far.has_value()) {
                continue;
            }
            // Flood the branch subtree; the tree property keeps this from
            // crossing back through the mixture node.
            std::vector<std::pair<NodeId, EdgeId>> stack{{*far, start}};
            while (!stack.empty()) {
                const auto [v, via] = stack.back();
                stack.pop_back();
                for (std::size_t p = 0; p < node_arity(g.node(v)); ++p) {
                    const EdgeId e = g.port_edge(v, p);
                    if (e == via || conditional[e.value]) {
                        continue;
                    }
                    conditional[e.value] = true;
                    const EdgeRecord& er = g.edge(e);
                    if (er.head.has_value()) {
                        const NodeId next = er.tail->node == v ? er.head->node : er.tail->node;
                        stack.push_back({next, e});
                    }
                }
            }
        }
    }
    return conditional;
}

} // namespace

InferenceResult run(const FactorGraph& g, const Schedule& schedule) {
    if (!g.is_validated()) {
        throw GraphError("run requires a validated graph");
    }
    const std::size_t ne = g.edge_count();
    std::vector<std::optional<Message>> fwd(ne);
    std::vector<std::optional<Message>> bwd(ne);

    // Terminal ends (observations, free ends) send their messages up front.
    for (std::size_t e = 0; e < ne; ++e) {
        const EdgeRecord& rec = g.edge(EdgeId{e});
        if (!rec.head.has_value()) {
            bwd[e] = terminal_message(rec);
        }
    }

    for (const ScheduleEntry& entry : schedule.entries) {
        const std::size_t arity = node_arity(g.node(entry.node));
        std::vector<const Message*> in(arity, nullptr);
        std::size_t out_port = arity;
        for (std::size_t p = 0; p < arity; ++p) {
            if (g.port_edge(entry.node, p) == entry.edge) {
                out_port = p;
            } else {
                in[p] = incoming_at(g, fwd, bwd, entry.node, p);
            }
        }
        if (out_port == arity) {
            throw GraphError("schedule entry does not touch " + node_str(entry.node));
        }
        Message out = node_message(g, entry.node, out_port, in);
        (entry.emits_forward ? fwd : bwd)[entry.edge.value] = std::move(out);
    }

    InferenceResult result;
    result.forward.reserve(ne);
    result.backward.reserve(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        if (!fwd[e].has_value() || !bwd[e].has_value()) {
            throw GraphError("schedule left " + edge_str(EdgeId{e}) + " without both messages");
        }
        result.forward.push_back(std::move(*fwd[e]));
        result.backward.push_back(std::move(*bwd[e]));
    }

    result.marginals.reserve(ne);
    result.edge_log_evidence.resize(ne);
    for (std::size_t e = 0; e < ne; ++e) {
        const Message& f = result.forward[e];
        const Message& b = result.backward[e];
        if (is_flat(f.body) && is_flat(b.body)) {
            result.marginals.emplace_back(Flat{});
            continue;
        }
        auto prod = multiply(f.body, b.body);
        result.marginals.push_back(std::move(prod.body));
        result.edge_log_evidence[e] = f.log_scale + b.log_scale + prod.log_norm;
    }

    result.model_conditional = mark_model_conditional(g);

    bool found = false;
    for (std::size_t e = 0; e < ne && !found; ++e) {
        if (result.edge_log_evidence[e].has_value() && !result.model_conditional[e]) {
            result.root_edge = EdgeId{e};
            result.log_evidence = *result.edge_log_evidence[e];
            found = true;
        }
    }
    for (std::size_t e = 0; e < ne && !found; ++e) {
        if (result.edge_log_evidence[e].has_value()) {
            result.root_edge = EdgeId{e};
            result.log_evidence = *result.edge_log_evidence[e];
            found = true;
        }
    }
    if (!found) {
        result.root_edge = EdgeId{0};
        result.log_evidence = 0.0;
    }
    return result;
}

double log_evidence_at_edge(const InferenceResult& result, EdgeId edge) {
    if (edge.value >= result.edge_log_evidence.size()) {
        throw GraphError("unknown " + edge_str(edge));
    }
    const auto& v = result.edge_log_evidence[edge.value];
    if (!v.has_value()) {
        throw GraphError("evidence undefined at " + edge_str(edge) +
                         " (both directions improper)");
    }
    return *v;
}

double log_evidence_at_node(const FactorGraph& g, const InferenceResult& result, NodeId node) {
    const std::size_t arity = node_arity(g.node(node));
    std::vector<Message> incoming(arity);
    for (std::size_t p = 0; p < arity; ++p) {
        const EdgeId e = g.port_edge(node, p);
        const bool node_is_tail = g.edge(e).tail->node == node;
        incoming[p] = node_is_tail ? result.backward[e.value] : result.forward[e.value];
    }
    for (std::size_t p = 0; p < arity; ++p) {
        std::vector<const Message*> others(arity, nullptr);
        for (std::size_t q = 0; q < arity; ++q) {
            if (q != p) {
                others[q] = &incoming[q];
            }
        }
        const Message out = node_message(g, node, p, others);
        if (is_flat(out.body) && is_flat(incoming[p].body)) {
            continue;
        }
        const auto prod = multiply(out.body, incoming[p].body);
        return out.log_scale + incoming[p].log_scale + prod.log_norm;
    }
    throw GraphError("evidence undefined at " + node_str(node) + " (all ports improper)");
}

} // namespace mixfg
