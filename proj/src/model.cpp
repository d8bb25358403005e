#include "pro_ood/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include <nlohmann/json.hpp>

#include "pro_ood/datasets.hpp"
#include "pro_ood/errors.hpp"
#include "pro_ood/rng.hpp"

namespace pro_ood {

using ordered_json = nlohmann::ordered_json;

Classifier::Classifier(std::size_t input_dim, std::size_t class_count, std::vector<Layer> layers)
    : input_dim_(input_dim), class_count_(class_count), layers_(std::move(layers)) {
    validate();
}

void Classifier::validate() const {
    if (input_dim_ == 0) throw SchemaError("classifier: input_dim must be positive");
    if (class_count_ < 2) throw SchemaError("classifier: class_count must be at least 2");
    std::size_t width = input_dim_;
    bool has_dense = false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (const auto* d = std::get_if<DenseLayer>(&layers_[i])) {
            if (d->in != width) {
                throw SchemaError("classifier: layer " + std::to_string(i) + " expects input " +
                                  std::to_string(d->in) + " but gets " + std::to_string(width));
            }
            if (d->W.rank() != 2 || d->W.rows() != d->out || d->W.cols() != d->in) {
                throw SchemaError("classifier: layer " + std::to_string(i) + " weight shape");
            }
            if (d->b.rank() != 1 || d->b.shape()[0] != d->out) {
                throw SchemaError("classifier: layer " + std::to_string(i) + " bias shape");
            }
            width = d->out;
            has_dense = true;
        }
    }
    if (!has_dense) throw SchemaError("classifier: needs at least one dense layer");
    if (width != class_count_) {
        throw SchemaError("classifier: final width " + std::to_string(width) +
                          " != class_count " + std::to_string(class_count_));
    }
}

Classifier Classifier::random(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                              std::size_t class_count, std::uint64_t seed, bool tanh_activation) {
    std::vector<Layer> layers;
    std::size_t width = input_dim;
    Rng rng = Rng::keyed(seed, 0x1417ULL);
    auto dense = [&](std::size_t in, std::size_t out) {
        DenseLayer d;
        d.in = in;
        d.out = out;
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> w(in * out);
        for (double& v : w) v = scale * rng.normal();
        d.W = Tensor::matrix(out, in, std::move(w));
        d.b = Tensor({out});
        return d;
    };
    for (std::size_t h : hidden) {
        layers.emplace_back(dense(width, h));
        if (tanh_activation) {
            layers.emplace_back(TanhLayer{});
        } else {
            layers.emplace_back(ReluLayer{});
        }
        width = h;
    }
    layers.emplace_back(dense(width, class_count));
    return Classifier(input_dim, class_count, std::move(layers));
}

Tensor Classifier::logits(const Tensor& x) const {
    if (x.rank() != 1 || x.shape()[0] != input_dim_) {
        throw DimensionError("forward: input has dimension " + std::to_string(x.size()) +
                             ", expected " + std::to_string(input_dim_));
    }
    x.require_finite("input");
    std::vector<double> h(x.data().begin(), x.data().end());
    for (const Layer& layer : layers_) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            std::vector<double> out(d->out);
            // Same summation order as the tape (matmul then bias add), so the
            // two forward routes agree bitwise.
            for (std::size_t i = 0; i < d->out; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < d->in; ++j) acc += d->W.at(i, j) * h[j];
                out[i] = acc + d->b[i];
            }
            h = std::move(out);
        } else if (std::holds_alternative<ReluLayer>(layer)) {
            for (double& v : h) v = v > 0.0 ? v : 0.0;
        } else {
            for (double& v : h) v = std::tanh(v);
        }
    }
    return Tensor::vector(std::move(h));
}

ForwardPass forward(const Classifier& net, const Tensor& x) {
    if (x.rank() != 1 || x.shape()[0] != net.input_dim()) {
        throw DimensionError("forward: input has dimension " + std::to_string(x.size()) +
                             ", expected " + std::to_string(net.input_dim()));
    }
    x.require_finite("input");
    ForwardPass fp;
    fp.input = fp.tape.leaf(x);
    Var h = fp.input;
    const auto& layers = net.layers();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (const auto* d = std::get_if<DenseLayer>(&layers[i])) {
            Var w = fp.tape.leaf(d->W);
            Var b = fp.tape.leaf(d->b);
            h = fp.tape.add(fp.tape.matmul(w, h), b);
            fp.params.push_back({i, w, b});
        } else if (std::holds_alternative<ReluLayer>(layers[i])) {
            h = fp.tape.relu(h);
        } else {
            h = fp.tape.tanh(h);
        }
    }
    fp.logits = h;
    return fp;
}

Var cross_entropy(ForwardPass& fp, std::size_t label) {
    const Tensor& z = fp.tape.value(fp.logits);
    if (label >= z.size()) throw ValueError("cross_entropy: label out of range");
    return fp.tape.sub(fp.tape.logsumexp(fp.logits), fp.tape.pick(fp.logits, label));
}

Tensor input_gradient(const ForwardPass& fp, Var scalar) {
    return Gradients(fp.tape, scalar).at(fp.input);
}

void TrainConfig::validate() const {
    if (batch_size == 0) throw ValueError("train: batch_size must be positive");
    if (learning_rate <= 0.0) throw ValueError("train: learning_rate must be positive");
    if (adversarial) {
        if (eps_adv <= 0.0) throw ValueError("train: eps_adv must be positive in adversarial mode");
        if (pgd_steps < 1) throw ValueError("train: pgd_steps must be at least 1");
        if (pgd_step_size <= 0.0) throw ValueError("train: pgd_step_size must be positive");
    }
}

namespace {

double plain_cross_entropy(const Classifier& net, const Tensor& x, std::size_t label) {
    const Tensor z = net.logits(x);
    double m = z[0];
    for (std::size_t i = 0; i < z.size(); ++i) m = std::max(m, z[i]);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) acc += std::exp(z[i] - m);
    return m + std::log(acc) - z[label];
}

}  // namespace

Tensor pgd_attack(const Classifier& net, const Tensor& x, std::size_t label, double eps_adv,
                  std::size_t steps, double step_size) {
    if (eps_adv < 0.0) throw ValueError("pgd_attack: eps_adv must be nonnegative");
    if (eps_adv == 0.0) return x;
    if (steps < 1) throw ValueError("pgd_attack: steps must be at least 1");
    if (step_size <= 0.0) throw ValueError("pgd_attack: step_size must be positive");

    Tensor current = x;
    Tensor best = x;
    double best_loss = plain_cross_entropy(net, x, label);
    for (std::size_t s = 0; s < steps; ++s) {
        ForwardPass fp = forward(net, current);
        Var loss = cross_entropy(fp, label);
        const Tensor g = input_gradient(fp, loss);
        for (std::size_t i = 0; i < current.size(); ++i) {
            double v = current[i];
            if (g[i] > 0.0) {
                v += step_size;
            } else if (g[i] < 0.0) {
                v -= step_size;
            }
            v = std::clamp(v, x[i] - eps_adv, x[i] + eps_adv);
            current[i] = v;
        }
        const double l = plain_cross_entropy(net, current, label);
        if (l > best_loss) {
            best_loss = l;
            best = current;
        }
    }
    return best;
}

TrainResult train_from(Classifier net, const Dataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    if (!data.labeled()) throw ValueError("train: dataset must be fully labeled");
    if (data.class_count != net.class_count()) {
        throw DimensionError("train: dataset classes != classifier classes");
    }
    if (data.dim() != net.input_dim()) {
        throw DimensionError("train: dataset dimension != classifier input_dim");
    }

    // Dense layer positions, for applying accumulated gradients.
    std::vector<std::size_t> dense_idx;
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        if (std::holds_alternative<DenseLayer>(net.layers()[i])) dense_idx.push_back(i);
    }

    const std::size_t n = data.n();
    double epoch_loss = 0.0;
    std::vector<double> epoch_losses;
    epoch_losses.reserve(cfg.epochs);
    std::vector<std::size_t> order(n);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = Rng::keyed(cfg.seed, 0x5a5aULL, epoch);
        shuffle_rng.shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            const double inv_batch = 1.0 / static_cast<double>(stop - start);

            std::vector<std::pair<Tensor, Tensor>> grads;
            grads.reserve(dense_idx.size());
            for (std::size_t li : dense_idx) {
                const auto& d = std::get<DenseLayer>(net.layers()[li]);
                grads.emplace_back(Tensor(d.W.shape()), Tensor(d.b.shape()));
            }

            for (std::size_t s = start; s < stop; ++s) {
                const std::size_t idx = order[s];
                Tensor x = data.row_tensor(idx);
                const std::size_t label = data.y[idx];
                if (cfg.adversarial) {
                    x = pgd_attack(net, x, label, cfg.eps_adv, cfg.pgd_steps, cfg.pgd_step_size);
                }
                ForwardPass fp = forward(net, x);
                Var loss = cross_entropy(fp, label);
                loss_sum += fp.tape.value(loss).scalar_value();

                Gradients g(fp.tape, loss, inv_batch);
                for (std::size_t k = 0; k < fp.params.size(); ++k) {
                    const Tensor& gw = g.at(fp.params[k].W);
                    const Tensor& gb = g.at(fp.params[k].b);
                    for (std::size_t i = 0; i < gw.size(); ++i) grads[k].first[i] += gw[i];
                    for (std::size_t i = 0; i < gb.size(); ++i) grads[k].second[i] += gb[i];
                }
            }

            for (std::size_t k = 0; k < dense_idx.size(); ++k) {
                auto& d = std::get<DenseLayer>(net.layers()[dense_idx[k]]);
                for (std::size_t i = 0; i < d.W.size(); ++i) {
                    d.W[i] -= cfg.learning_rate * grads[k].first[i];
                }
                for (std::size_t i = 0; i < d.b.size(); ++i) {
                    d.b[i] -= cfg.learning_rate * grads[k].second[i];
                }
            }
        }

        epoch_loss = loss_sum / static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        }
        epoch_losses.push_back(epoch_loss);
    }

    if (cfg.epochs == 0) epoch_loss = mean_cross_entropy(net, data);
    return TrainResult{std::move(net), epoch_loss, std::move(epoch_losses)};
}

TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const std::vector<std::size_t>& hidden, bool tanh_activation) {
    data.validate();
    if (!data.labeled()) throw ValueError("train: dataset must be fully labeled");
    Classifier net = Classifier::random(data.dim(), hidden, data.class_count, cfg.seed,
                                        tanh_activation);
    return train_from(std::move(net), data, cfg);
}

double mean_cross_entropy(const Classifier& net, const Dataset& data) {
    data.validate();
    if (!data.labeled()) throw ValueError("mean_cross_entropy: dataset must be labeled");
    double acc = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        acc += plain_cross_entropy(net, data.row_tensor(i), data.y[i]);
    }
    return acc / static_cast<double>(data.n());
}

double accuracy(const Classifier& net, const Dataset& data) {
    data.validate();
    if (!data.labeled()) throw ValueError("accuracy: dataset must be labeled");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const Tensor z = net.logits(data.row_tensor(i));
        std::size_t best = 0;
        for (std::size_t c = 1; c < z.size(); ++c) {
            if (z[c] > z[best]) best = c;
        }
        if (best == data.y[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.n());
}

namespace {

ordered_json tensor_to_json(const Tensor& t) {
    ordered_json arr = ordered_json::array();
    for (double v : t.data()) arr.push_back(v);
    return arr;
}

std::vector<double> json_to_doubles(const ordered_json& arr, const char* what) {
    if (!arr.is_array()) throw SchemaError(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& v : arr) {
        if (!v.is_number()) throw SchemaError(std::string(what) + " must hold numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

void save_weights(const Classifier& net, const std::filesystem::path& path) {
    for (const Layer& layer : net.layers()) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            d->W.require_finite("weights");
            d->b.require_finite("bias");
        }
    }
    ordered_json j;
    j["format_version"] = 1;
    j["input_dim"] = net.input_dim();
    j["class_count"] = net.class_count();
    j["layers"] = ordered_json::array();
    for (const Layer& layer : net.layers()) {
        ordered_json lj;
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            lj["type"] = "dense";
            lj["in"] = d->in;
            lj["out"] = d->out;
            lj["W"] = tensor_to_json(d->W);
            lj["b"] = tensor_to_json(d->b);
        } else if (std::holds_alternative<ReluLayer>(layer)) {
            lj["type"] = "relu";
        } else {
            lj["type"] = "tanh";
        }
        j["layers"].push_back(std::move(lj));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed for " + path.string());
}

Classifier load_weights(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    ordered_json j;
    try {
        j = ordered_json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }

    auto require = [&](const ordered_json& obj, const char* field) -> const ordered_json& {
        if (!obj.contains(field)) throw SchemaError(std::string("missing field ") + field);
        return obj.at(field);
    };

    if (require(j, "format_version").get<int>() != 1) {
        throw SchemaError("unsupported format_version");
    }
    const auto input_dim = require(j, "input_dim").get<std::size_t>();
    const auto class_count = require(j, "class_count").get<std::size_t>();
    const auto& layers_json = require(j, "layers");
    if (!layers_json.is_array()) throw SchemaError("layers must be an array");

    std::vector<Layer> layers;
    for (const auto& lj : layers_json) {
        const std::string type = require(lj, "type").get<std::string>();
        if (type == "dense") {
            DenseLayer d;
            d.in = require(lj, "in").get<std::size_t>();
            d.out = require(lj, "out").get<std::size_t>();
            std::vector<double> w = json_to_doubles(require(lj, "W"), "W");
            std::vector<double> b = json_to_doubles(require(lj, "b"), "b");
            if (w.size() != d.in * d.out) {
                throw SchemaError("dense layer W has " + std::to_string(w.size()) +
                                  " entries, expected " + std::to_string(d.in * d.out));
            }
            if (b.size() != d.out) {
                throw SchemaError("dense layer b has " + std::to_string(b.size()) +
                                  " entries, expected " + std::to_string(d.out));
            }
            d.W = Tensor::matrix(d.out, d.in, std::move(w));
            d.b = Tensor::vector(std::move(b));
            layers.emplace_back(std::move(d));
        } else if (type == "relu") {
            layers.emplace_back(ReluLayer{});
        } else if (type == "tanh") {
            layers.emplace_back(TanhLayer{});
        } else {
            throw SchemaError("unknown layer type " + type);
        }
    }
    // Classifier's constructor re-validates layer composition.
    return Classifier(input_dim, class_count, std::move(layers));
}

}  // namespace pro_ood
