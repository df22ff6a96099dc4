#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "mixfg/distributions.hpp"
#include "mixfg/errors.hpp"

namespace mixfg {

struct NodeId {
    std::size_t value = 0;
    friend bool operator==(NodeId a, NodeId b) noexcept { return a.value == b.value; }
};

struct EdgeId {
    std::size_t value = 0;
    friend bool operator==(EdgeId a, EdgeId b) noexcept { return a.value == b.value; }
};

// What kind of variable an edge carries.
struct EdgeKind {
    enum class Family : std::uint8_t { Continuous, Discrete, Simplex };
    Family family = Family::Continuous;
    std::size_t cardinality = 0; // for Discrete and Simplex

    static EdgeKind continuous() noexcept { return {Family::Continuous, 0}; }
    static EdgeKind discrete(std::size_t k) noexcept { return {Family::Discrete, k}; }
    static EdgeKind simplex(std::size_t k) noexcept { return {Family::Simplex, k}; }
    friend bool operator==(const EdgeKind&, const EdgeKind&) = default;
};

// ---------------------------------------------------------------------------
// Node kinds. Port numbering is fixed per kind and documented on each struct.

// One port (0): emits its distribution as the forward message.
struct PriorNode {
    Distribution dist;
};

// Observation factor N(y | s, noise_variance). Ports: 0 = s (mean input),
// 1 = y (observation side).
struct GaussianLikelihood {
    explicit GaussianLikelihood(double noise_variance);
    double noise_variance;
};

// First-order autoregression N(next | rho * prev, process_variance).
// Ports: 0 = prev, 1 = next.
struct GaussianAR1 {
    GaussianAR1(double rho, double process_variance);
    double rho;
    double process_variance;
};

// Column-stochastic K x K matrix; entry (i, j) is p(next = i | prev = j).
class TransitionMatrix {
public:
    TransitionMatrix(std::size_t k, std::vector<double> row_major);
    static TransitionMatrix from_rows(const std::vector<std::vector<double>>& rows);
    std::size_t size() const noexcept { return k_; }
    double operator()(std::size_t i, std::size_t j) const { return m_[i * k_ + j]; }

private:
    std::size_t k_;
    std::vector<double> m_;
};

// Discrete conditional p(next | prev) = T. Ports: 0 = prev, 1 = next.
struct TransitionNode {
    TransitionMatrix T;
};

// Categorical draw whose probability vector is itself a random variable with a
// Dirichlet message. Ports: 0 = probs (simplex K), 1 = outcome (discrete K).
// In variational mode the forward message uses exp(E[ln pi]) in place of the
// mean, and soft backward messages are accepted.
struct CategoricalFromProbs {
    std::size_t k;
    bool variational = false;
};

// Ternary equality constraint; all three ports carry the same variable.
struct EqualityNode {};

// Switch over k sub-models. Ports: 0 = selector m (discrete k), 1 = out
// (the variable shared by all sub-models), 2 .. k+1 = one port per sub-model.
struct MixtureNode {
    explicit MixtureNode(std::size_t k);
    std::size_t k;
};

using NodeKind = std::variant<PriorNode, GaussianLikelihood, GaussianAR1, TransitionNode,
                              CategoricalFromProbs, EqualityNode, MixtureNode>;

std::size_t node_arity(const NodeKind& kind);

struct Endpoint {
    NodeId node;
    std::size_t port = 0;
};

struct EdgeRecord {
    std::optional<Endpoint> tail; // always set
    std::optional<Endpoint> head; // node, or empty if terminal end
    EdgeKind kind;
    std::optional<Distribution> observation; // point mass at the open end
    bool declared_free = false;
};

// ---------------------------------------------------------------------------
// Graph container. Mutable while being built; validate() freezes it.

class FactorGraph {
public:
    NodeId add_node(NodeKind kind);
    // Forward direction on an edge runs tail -> head.
    EdgeId add_edge(Endpoint tail, Endpoint head, EdgeKind kind);
    EdgeId add_half_edge(Endpoint tail, EdgeKind kind);
    void attach_head(EdgeId edge, Endpoint head);
    void observe(EdgeId edge, double value);           // continuous edges
    void observe(EdgeId edge, std::size_t category);   // discrete edges
    void mark_free(EdgeId edge);

    // Checks port binding, edge kinds, acyclicity and connectivity, then
    // freezes the graph. Throws GraphError on any violation.
    void validate();
    bool is_validated() const noexcept { return validated_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }
    const NodeKind& node(NodeId id) const;
    const EdgeRecord& edge(EdgeId id) const;
    EdgeId port_edge(NodeId node, std::size_t port) const;

private:
    void require_mutable() const;
    void bind_port(Endpoint ep, EdgeId edge);
    void check_edge_kinds() const;

    std::vector<NodeKind> nodes_;
    std::vector<EdgeRecord> edges_;
    std::vector<std::vector<std::optional<EdgeId>>> ports_;
    bool validated_ = false;
};

// ---------------------------------------------------------------------------
// Scheduling and inference

// One sum-product message emission: `node` computes the message on `edge`,
// in the forward direction if the node sits at the edge's tail.
struct ScheduleEntry {
    NodeId node;
    EdgeId edge;
    bool emits_forward;
};

struct Schedule {
    std::vector<ScheduleEntry> entries;
};

// Deterministic two-pass tree sweep (leaves to root, then root to leaves),
// rooted at node 0. Every edge direction owned by a node appears exactly once.
Schedule schedule_sweep(const FactorGraph& graph);

struct InferenceResult {
    std::vector<Message> forward;  // indexed by edge id
    std::vector<Message> backward; // indexed by edge id
    std::vector<Distribution> marginals;
    // Log evidence observed at each edge; empty when both directions are
    // improper (nothing to integrate).
    std::vector<std::optional<double>> edge_log_evidence;
    // True for edges inside a mixture branch subgraph, where the edge evidence
    // is conditional on that branch's sub-model being active.
    std::vector<bool> model_conditional;
    EdgeId root_edge{0};
    double log_evidence = 0.0;
};

InferenceResult run(const FactorGraph& graph, const Schedule& schedule);

// Evidence read off a single edge (Theorem-style cross-check). Throws
// GraphError when undefined at this edge.
double log_evidence_at_edge(const InferenceResult& result, EdgeId edge);

// Evidence read off a single node: log of the local factor integrated against
// all incoming messages.
double log_evidence_at_node(const FactorGraph& graph, const InferenceResult& result, NodeId node);

// Message a node emits on the edge at `out_port`, given the messages arriving
// on its other ports (vector indexed by port; the entry at out_port is unused).
Message node_message(const FactorGraph& graph, NodeId node, std::size_t out_port,
                     const std::vector<const Message*>& incoming);

} // namespace mixfg
