#pragma once

#include <cstddef>
#include <vector>

#include "pro_ood/tensor.hpp"

namespace pro_ood {

/// Handle to a node on a Tape.
struct Var {
    int id = -1;
};

/// Record of one forward computation, replayable and differentiable.
///
/// Every builder method runs the primitive eagerly, stores the result, and
/// returns a handle. Node creation order is a topological order of the
/// computation graph, so the backward pass walks ids in reverse. A tape is
/// append-only; values are never mutated after recording.
class Tape {
public:
    enum class Op {
        leaf,
        matmul,
        add,
        sub,
        mul,
        affine,
        relu,
        tanh,
        exp,
        log,
        pow_const,
        sum,
        max,
        logsumexp,
        pick,
        gather,
        sub_scalar,
    };

    Var leaf(Tensor value);

    // a: [m x k], b: [k] or [k x n].
    Var matmul(Var a, Var b);

    // Elementwise on identical shapes.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);

    // scale * a + shift, elementwise with constants.
    Var affine(Var a, double scale, double shift);

    Var relu(Var a);   // gradient at exactly 0 is 0
    Var tanh(Var a);
    Var exp(Var a);
    Var log(Var a);

    // a^g for a >= 0, g > 0. Value and gradient are 0 at a == 0 (flat
    // subgradient, consistent with relu's choice at its kink).
    Var pow_const(Var a, double exponent);

    Var sum(Var a);
    Var max(Var a);        // subgradient to the first argmax
    Var logsumexp(Var a);  // stable: max + log(sum(exp(a - max)))

    Var pick(Var a, std::size_t index);
    Var gather(Var a, std::vector<std::size_t> indices);

    // vec[i] - scalar for every i.
    Var sub_scalar(Var vec, Var scalar);

    const Tensor& value(Var v) const;
    std::size_t node_count() const { return nodes_.size(); }

    // Recompute every node from the leaves with the recorded ops. Replay of a
    // well-formed tape is bit-exact; tests assert this invariant.
    std::vector<Tensor> replay() const;

    struct Node {
        Op op;
        int a = -1;
        int b = -1;
        double c0 = 0.0;  // affine scale / pow exponent
        double c1 = 0.0;  // affine shift
        std::vector<std::size_t> indices;
        Tensor value;
    };

    const std::vector<Node>& nodes() const { return nodes_; }

private:
    friend class Gradients;

    Var push(Node n);
    const Tensor& operand(Var v) const;
    static Tensor eval(const Node& n, const Tensor* a, const Tensor* b);

    std::vector<Node> nodes_;
};

/// Adjoints of one backward pass. A single Gradients object reads from one
/// tape; concurrent backward passes must use distinct tapes.
class Gradients {
public:
    // Reverse pass from a scalar node, seeding its adjoint with `seed`.
    // Throws DimensionError if `output` is not a scalar.
    Gradients(const Tape& tape, Var output, double seed = 1.0);

    // Adjoint of any node (zeros if the node does not influence the output).
    const Tensor& at(Var v) const;

private:
    std::vector<Tensor> adjoints_;
};

}  // namespace pro_ood
