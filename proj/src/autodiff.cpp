#include "pro_ood/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "pro_ood/errors.hpp"

namespace pro_ood {

namespace {

std::size_t argmax_first(const Tensor& t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i] > t[best]) best = i;
    }
    return best;
}

}  // namespace

Var Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::operand(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
        throw ValueError("Var does not belong to this tape");
    }
    return nodes_[static_cast<std::size_t>(v.id)].value;
}

const Tensor& Tape::value(Var v) const { return operand(v); }

Tensor Tape::eval(const Node& n, const Tensor* a, const Tensor* b) {
    switch (n.op) {
        case Op::leaf:
            return n.value;
        case Op::matmul: {
            if (a->rank() != 2) throw DimensionError("matmul: lhs must be rank 2");
            const std::size_t m = a->shape()[0], k = a->shape()[1];
            if (b->rank() == 1) {
                if (b->shape()[0] != k) throw DimensionError("matmul: inner dimensions differ");
                Tensor out({m});
                for (std::size_t i = 0; i < m; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < k; ++j) acc += a->at(i, j) * (*b)[j];
                    out[i] = acc;
                }
                return out;
            }
            if (b->rank() == 2) {
                if (b->shape()[0] != k) throw DimensionError("matmul: inner dimensions differ");
                const std::size_t p = b->shape()[1];
                Tensor out({m, p});
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < k; ++j) {
                        const double aij = a->at(i, j);
                        for (std::size_t c = 0; c < p; ++c) out.at(i, c) += aij * b->at(j, c);
                    }
                return out;
            }
            throw DimensionError("matmul: rhs must be rank 1 or 2");
        }
        case Op::add:
        case Op::sub:
        case Op::mul: {
            if (!a->same_shape(*b)) throw DimensionError("elementwise op: shapes differ");
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) {
                switch (n.op) {
                    case Op::add: out[i] = (*a)[i] + (*b)[i]; break;
                    case Op::sub: out[i] = (*a)[i] - (*b)[i]; break;
                    default: out[i] = (*a)[i] * (*b)[i]; break;
                }
            }
            return out;
        }
        case Op::affine: {
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) out[i] = n.c0 * (*a)[i] + n.c1;
            return out;
        }
        case Op::relu: {
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) out[i] = (*a)[i] > 0.0 ? (*a)[i] : 0.0;
            return out;
        }
        case Op::tanh: {
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) out[i] = std::tanh((*a)[i]);
            return out;
        }
        case Op::exp: {
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) out[i] = std::exp((*a)[i]);
            return out;
        }
        case Op::log: {
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) out[i] = std::log((*a)[i]);
            return out;
        }
        case Op::pow_const: {
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) {
                const double x = (*a)[i];
                if (x < 0.0) throw NumericError("pow_const: negative base");
                out[i] = x == 0.0 ? 0.0 : std::pow(x, n.c0);
            }
            return out;
        }
        case Op::sum: {
            double acc = 0.0;
            for (std::size_t i = 0; i < a->size(); ++i) acc += (*a)[i];
            return Tensor::scalar(acc);
        }
        case Op::max: {
            if (a->size() == 0) throw DimensionError("max: empty operand");
            return Tensor::scalar((*a)[argmax_first(*a)]);
        }
        case Op::logsumexp: {
            if (a->size() == 0) throw DimensionError("logsumexp: empty operand");
            const double m = (*a)[argmax_first(*a)];
            double acc = 0.0;
            for (std::size_t i = 0; i < a->size(); ++i) acc += std::exp((*a)[i] - m);
            return Tensor::scalar(m + std::log(acc));
        }
        case Op::pick: {
            if (n.indices[0] >= a->size()) throw DimensionError("pick: index out of range");
            return Tensor::scalar((*a)[n.indices[0]]);
        }
        case Op::gather: {
            Tensor out({n.indices.size()});
            for (std::size_t i = 0; i < n.indices.size(); ++i) {
                if (n.indices[i] >= a->size()) throw DimensionError("gather: index out of range");
                out[i] = (*a)[n.indices[i]];
            }
            return out;
        }
        case Op::sub_scalar: {
            const double s = b->scalar_value();
            Tensor out(a->shape());
            for (std::size_t i = 0; i < a->size(); ++i) out[i] = (*a)[i] - s;
            return out;
        }
    }
    throw ValueError("unknown op");
}

Var Tape::leaf(Tensor value) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    return push(std::move(n));
}

#define PRO_OOD_BINARY(NAME, OPK)                            \
    Var Tape::NAME(Var a, Var b) {                           \
        Node n;                                              \
        n.op = OPK;                                          \
        n.a = a.id;                                          \
        n.b = b.id;                                          \
        n.value = eval(n, &operand(a), &operand(b));         \
        return push(std::move(n));                           \
    }

PRO_OOD_BINARY(matmul, Op::matmul)
PRO_OOD_BINARY(add, Op::add)
PRO_OOD_BINARY(sub, Op::sub)
PRO_OOD_BINARY(mul, Op::mul)
PRO_OOD_BINARY(sub_scalar, Op::sub_scalar)
#undef PRO_OOD_BINARY

#define PRO_OOD_UNARY(NAME, OPK)                             \
    Var Tape::NAME(Var a) {                                  \
        Node n;                                              \
        n.op = OPK;                                          \
        n.a = a.id;                                          \
        n.value = eval(n, &operand(a), nullptr);             \
        return push(std::move(n));                           \
    }

PRO_OOD_UNARY(relu, Op::relu)
PRO_OOD_UNARY(tanh, Op::tanh)
PRO_OOD_UNARY(exp, Op::exp)
PRO_OOD_UNARY(log, Op::log)
PRO_OOD_UNARY(sum, Op::sum)
PRO_OOD_UNARY(max, Op::max)
PRO_OOD_UNARY(logsumexp, Op::logsumexp)
#undef PRO_OOD_UNARY

Var Tape::affine(Var a, double scale, double shift) {
    Node n;
    n.op = Op::affine;
    n.a = a.id;
    n.c0 = scale;
    n.c1 = shift;
    n.value = eval(n, &operand(a), nullptr);
    return push(std::move(n));
}

Var Tape::pow_const(Var a, double exponent) {
    if (exponent <= 0.0) throw ValueError("pow_const: exponent must be positive");
    Node n;
    n.op = Op::pow_const;
    n.a = a.id;
    n.c0 = exponent;
    n.value = eval(n, &operand(a), nullptr);
    return push(std::move(n));
}

Var Tape::pick(Var a, std::size_t index) {
    Node n;
    n.op = Op::pick;
    n.a = a.id;
    n.indices = {index};
    n.value = eval(n, &operand(a), nullptr);
    return push(std::move(n));
}

Var Tape::gather(Var a, std::vector<std::size_t> indices) {
    if (indices.empty()) throw ValueError("gather: empty index list");
    Node n;
    n.op = Op::gather;
    n.a = a.id;
    n.indices = std::move(indices);
    n.value = eval(n, &operand(a), nullptr);
    return push(std::move(n));
}

std::vector<Tensor> Tape::replay() const {
    std::vector<Tensor> out;
    out.reserve(nodes_.size());
    for (const Node& n : nodes_) {
        const Tensor* a = n.a >= 0 ? &out[static_cast<std::size_t>(n.a)] : nullptr;
        const Tensor* b = n.b >= 0 ? &out[static_cast<std::size_t>(n.b)] : nullptr;
        out.push_back(eval(n, a, b));
    }
    return out;
}

Gradients::Gradients(const Tape& tape, Var output, double seed) {
    const auto& nodes = tape.nodes();
    if (output.id < 0 || output.id >= static_cast<int>(nodes.size())) {
        throw ValueError("backward: Var does not belong to this tape");
    }
    if (nodes[static_cast<std::size_t>(output.id)].value.size() != 1) {
        throw DimensionError("backward: terminal node is not a scalar");
    }

    adjoints_.reserve(nodes.size());
    for (const auto& n : nodes) adjoints_.emplace_back(n.value.shape());
    adjoints_[static_cast<std::size_t>(output.id)][0] = seed;

    // Creation order is topological, so reverse id order is a valid reverse
    // topological visit.
    for (int id = output.id; id >= 0; --id) {
        const Tape::Node& n = nodes[static_cast<std::size_t>(id)];
        const Tensor& adj = adjoints_[static_cast<std::size_t>(id)];
        if (n.op == Tape::Op::leaf) continue;

        const Tensor& av = nodes[static_cast<std::size_t>(n.a)].value;
        Tensor& da = adjoints_[static_cast<std::size_t>(n.a)];

        switch (n.op) {
            case Tape::Op::matmul: {
                const Tensor& bv = nodes[static_cast<std::size_t>(n.b)].value;
                Tensor& db = adjoints_[static_cast<std::size_t>(n.b)];
                const std::size_t m = av.shape()[0], k = av.shape()[1];
                if (bv.rank() == 1) {
                    for (std::size_t i = 0; i < m; ++i) {
                        const double g = adj[i];
                        for (std::size_t j = 0; j < k; ++j) {
                            da.at(i, j) += g * bv[j];
                            db[j] += g * av.at(i, j);
                        }
                    }
                } else {
                    const std::size_t p = bv.shape()[1];
                    for (std::size_t i = 0; i < m; ++i)
                        for (std::size_t c = 0; c < p; ++c) {
                            const double g = adj.at(i, c);
                            for (std::size_t j = 0; j < k; ++j) {
                                da.at(i, j) += g * bv.at(j, c);
                                db.at(j, c) += g * av.at(i, j);
                            }
                        }
                }
                break;
            }
            case Tape::Op::add: {
                Tensor& db = adjoints_[static_cast<std::size_t>(n.b)];
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    da[i] += adj[i];
                    db[i] += adj[i];
                }
                break;
            }
            case Tape::Op::sub: {
                Tensor& db = adjoints_[static_cast<std::size_t>(n.b)];
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    da[i] += adj[i];
                    db[i] -= adj[i];
                }
                break;
            }
            case Tape::Op::mul: {
                const Tensor& bv = nodes[static_cast<std::size_t>(n.b)].value;
                Tensor& db = adjoints_[static_cast<std::size_t>(n.b)];
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    da[i] += adj[i] * bv[i];
                    db[i] += adj[i] * av[i];
                }
                break;
            }
            case Tape::Op::affine:
                for (std::size_t i = 0; i < adj.size(); ++i) da[i] += n.c0 * adj[i];
                break;
            case Tape::Op::relu:
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    if (av[i] > 0.0) da[i] += adj[i];
                }
                break;
            case Tape::Op::tanh: {
                const Tensor& out = n.value;
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    da[i] += (1.0 - out[i] * out[i]) * adj[i];
                }
                break;
            }
            case Tape::Op::exp: {
                const Tensor& out = n.value;
                for (std::size_t i = 0; i < adj.size(); ++i) da[i] += out[i] * adj[i];
                break;
            }
            case Tape::Op::log:
                for (std::size_t i = 0; i < adj.size(); ++i) da[i] += adj[i] / av[i];
                break;
            case Tape::Op::pow_const:
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    if (av[i] > 0.0) da[i] += n.c0 * std::pow(av[i], n.c0 - 1.0) * adj[i];
                }
                break;
            case Tape::Op::sum: {
                const double g = adj[0];
                for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
                break;
            }
            case Tape::Op::max:
                da[argmax_first(av)] += adj[0];
                break;
            case Tape::Op::logsumexp: {
                const double lse = n.value[0];
                const double g = adj[0];
                for (std::size_t i = 0; i < da.size(); ++i) {
                    da[i] += std::exp(av[i] - lse) * g;
                }
                break;
            }
            case Tape::Op::pick:
                da[n.indices[0]] += adj[0];
                break;
            case Tape::Op::gather:
                for (std::size_t i = 0; i < n.indices.size(); ++i) da[n.indices[i]] += adj[i];
                break;
            case Tape::Op::sub_scalar: {
                Tensor& db = adjoints_[static_cast<std::size_t>(n.b)];
                double acc = 0.0;
                for (std::size_t i = 0; i < adj.size(); ++i) {
                    da[i] += adj[i];
                    acc += adj[i];
                }
                db[0] -= acc;
                break;
            }
            case Tape::Op::leaf:
                break;
        }
    }
}

const Tensor& Gradients::at(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(adjoints_.size())) {
        throw ValueError("Gradients::at: Var does not belong to the tape");
    }
    return adjoints_[static_cast<std::size_t>(v.id)];
}

}  // namespace pro_ood
