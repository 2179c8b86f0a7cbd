#include "midpool/autodiff/ops.hpp"

#include <cmath>
#include <string>

#include "midpool/errors.hpp"

namespace midpool::autodiff {

namespace {

using detail::Node;

// Parent accessors used inside backward closures.
inline Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }
inline bool wants(Node& self, std::size_t i) { return self.parents[i]->requires_grad; }

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                             b.shape_str());
    }
}

double sigmoid(double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions differ " + a.shape_str() + " * " +
                             b.shape_str());
    }
    Matrix out = a.value() * b.value();
    return Tensor::from_op(std::move(out), {a, b}, [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) pa.grad.noalias() += self.grad * pb.value.transpose();
        if (pb.requires_grad) pb.grad.noalias() += pa.value.transpose() * self.grad;
    });
}

Tensor apply_unary(const Tensor& x, UnaryKind kind) {
    const Matrix& v = x.value();
    Matrix out(v.rows(), v.cols());
    switch (kind) {
        case UnaryKind::abs: out = v.cwiseAbs(); break;
        case UnaryKind::tanh: out = v.array().tanh(); break;
        case UnaryKind::sigmoid: out = v.unaryExpr([](double t) { return sigmoid(t); }); break;
        case UnaryKind::relu: out = v.cwiseMax(0.0); break;
        case UnaryKind::neg: out = -v; break;
        case UnaryKind::square: out = v.array().square(); break;
        case UnaryKind::identity: out = v; break;
    }
    return Tensor::from_op(std::move(out), {x}, [kind](Node& self) {
        Node& px = parent(self, 0);
        const auto g = self.grad.array();
        const auto in = px.value.array();
        const auto y = self.value.array();
        switch (kind) {
            case UnaryKind::abs:
                px.grad.array() += g * in.unaryExpr([](double t) {
                    return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0);
                });
                break;
            case UnaryKind::tanh: px.grad.array() += g * (1.0 - y.square()); break;
            case UnaryKind::sigmoid: px.grad.array() += g * y * (1.0 - y); break;
            case UnaryKind::relu:
                px.grad.array() += g * in.unaryExpr([](double t) { return t > 0 ? 1.0 : 0.0; });
                break;
            case UnaryKind::neg: px.grad.array() -= g; break;
            case UnaryKind::square: px.grad.array() += 2.0 * g * in; break;
            case UnaryKind::identity: px.grad.array() += g; break;
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    return Tensor::from_op(a.value() + b.value(), {a, b}, [](Node& self) {
        if (wants(self, 0)) parent(self, 0).grad += self.grad;
        if (wants(self, 1)) parent(self, 1).grad += self.grad;
    });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    return Tensor::from_op(a.value() - b.value(), {a, b}, [](Node& self) {
        if (wants(self, 0)) parent(self, 0).grad += self.grad;
        if (wants(self, 1)) parent(self, 1).grad -= self.grad;
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    return Tensor::from_op(a.value().cwiseProduct(b.value()), {a, b}, [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) pa.grad += self.grad.cwiseProduct(pb.value);
        if (pb.requires_grad) pb.grad += self.grad.cwiseProduct(pa.value);
    });
}

Tensor scale(const Tensor& x, double factor) {
    return Tensor::from_op(x.value() * factor, {x}, [factor](Node& self) {
        parent(self, 0).grad += factor * self.grad;
    });
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != x.cols()) {
        throw DimensionError("add_row: bias " + bias.shape_str() + " does not match " +
                             x.shape_str());
    }
    Matrix out = x.value().rowwise() + bias.value().row(0);
    return Tensor::from_op(std::move(out), {x, bias}, [](Node& self) {
        if (wants(self, 0)) parent(self, 0).grad += self.grad;
        if (wants(self, 1)) parent(self, 1).grad += self.grad.colwise().sum();
    });
}

Tensor mul_col(const Tensor& x, const Tensor& s) {
    if (s.cols() != 1 || s.rows() != x.rows()) {
        throw DimensionError("mul_col: gate " + s.shape_str() + " does not match " +
                             x.shape_str());
    }
    Matrix out = x.value().array().colwise() * s.value().col(0).array();
    return Tensor::from_op(std::move(out), {x, s}, [](Node& self) {
        Node& px = parent(self, 0);
        Node& ps = parent(self, 1);
        if (px.requires_grad) {
            px.grad.array() += self.grad.array().colwise() * ps.value.col(0).array();
        }
        if (ps.requires_grad) {
            ps.grad.col(0) += self.grad.cwiseProduct(px.value).rowwise().sum();
        }
    });
}

Tensor gather_rows(const Tensor& x, std::span<const std::size_t> idx) {
    const auto n = static_cast<std::size_t>(x.rows());
    Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= n) {
            throw IndexError("gather_rows: index " + std::to_string(idx[j]) +
                             " out of range for " + std::to_string(n) + " rows");
        }
        out.row(static_cast<Eigen::Index>(j)) = x.value().row(static_cast<Eigen::Index>(idx[j]));
    }
    std::vector<std::size_t> kept(idx.begin(), idx.end());
    return Tensor::from_op(std::move(out), {x}, [kept = std::move(kept)](Node& self) {
        Node& px = parent(self, 0);
        for (std::size_t j = 0; j < kept.size(); ++j) {
            px.grad.row(static_cast<Eigen::Index>(kept[j])) +=
                self.grad.row(static_cast<Eigen::Index>(j));
        }
    });
}

Tensor scatter_rows(const Tensor& x, std::span<const std::size_t> idx, Eigen::Index n) {
    if (static_cast<Eigen::Index>(idx.size()) != x.rows()) {
        throw DimensionError("scatter_rows: " + std::to_string(idx.size()) +
                             " indices for tensor " + x.shape_str());
    }
    Matrix out = Matrix::Zero(n, x.cols());
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (static_cast<Eigen::Index>(idx[j]) >= n) {
            throw IndexError("scatter_rows: index " + std::to_string(idx[j]) +
                             " out of range for " + std::to_string(n) + " rows");
        }
        out.row(static_cast<Eigen::Index>(idx[j])) = x.value().row(static_cast<Eigen::Index>(j));
    }
    std::vector<std::size_t> kept(idx.begin(), idx.end());
    return Tensor::from_op(std::move(out), {x}, [kept = std::move(kept)](Node& self) {
        Node& px = parent(self, 0);
        for (std::size_t j = 0; j < kept.size(); ++j) {
            px.grad.row(static_cast<Eigen::Index>(j)) +=
                self.grad.row(static_cast<Eigen::Index>(kept[j]));
        }
    });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const Eigen::Index rows = parts.front().rows();
    Eigen::Index total = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) {
            throw DimensionError("concat_cols: row mismatch " + parts.front().shape_str() +
                                 " vs " + p.shape_str());
        }
        total += p.cols();
    }
    Matrix out(rows, total);
    std::vector<Eigen::Index> offsets;
    offsets.reserve(parts.size());
    Eigen::Index at = 0;
    for (const auto& p : parts) {
        offsets.push_back(at);
        out.middleCols(at, p.cols()) = p.value();
        at += p.cols();
    }
    return Tensor::from_op(std::move(out), parts, [offsets = std::move(offsets)](Node& self) {
        for (std::size_t i = 0; i < self.parents.size(); ++i) {
            Node& p = parent(self, i);
            if (p.requires_grad) p.grad += self.grad.middleCols(offsets[i], p.value.cols());
        }
    });
}

Tensor slice_cols(const Tensor& x, Eigen::Index begin, Eigen::Index end) {
    if (begin < 0 || end > x.cols() || begin > end) {
        throw IndexError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside " + x.shape_str());
    }
    Matrix out = x.value().middleCols(begin, end - begin);
    return Tensor::from_op(std::move(out), {x}, [begin](Node& self) {
        parent(self, 0).grad.middleCols(begin, self.grad.cols()) += self.grad;
    });
}

Tensor reduce(const Tensor& x, Axis axis, ReduceKind kind) {
    if (x.size() == 0) throw DimensionError("reduce: empty tensor");
    const Matrix& v = x.value();
    const bool over_rows = axis == Axis::rows;
    const Eigen::Index slices = over_rows ? v.cols() : v.rows();
    const Eigen::Index length = over_rows ? v.rows() : v.cols();
    Matrix out = over_rows ? Matrix(1, slices) : Matrix(slices, 1);
    std::vector<Eigen::Index> argmax;
    if (kind == ReduceKind::max) argmax.resize(static_cast<std::size_t>(slices));

    for (Eigen::Index s = 0; s < slices; ++s) {
        auto at = [&](Eigen::Index t) { return over_rows ? v(t, s) : v(s, t); };
        double acc = 0.0;
        if (kind == ReduceKind::max) {
            Eigen::Index best = 0;
            for (Eigen::Index t = 1; t < length; ++t) {
                if (at(t) > at(best)) best = t;
            }
            argmax[static_cast<std::size_t>(s)] = best;
            acc = at(best);
        } else {
            for (Eigen::Index t = 0; t < length; ++t) acc += at(t);
            if (kind == ReduceKind::mean) acc /= static_cast<double>(length);
        }
        out(over_rows ? 0 : s, over_rows ? s : 0) = acc;
    }

    return Tensor::from_op(
        std::move(out), {x}, [over_rows, kind, length, argmax = std::move(argmax)](Node& self) {
            Node& px = parent(self, 0);
            const Eigen::Index slices = self.grad.size();
            for (Eigen::Index s = 0; s < slices; ++s) {
                const double g = self.grad(over_rows ? 0 : s, over_rows ? s : 0);
                if (kind == ReduceKind::max) {
                    const Eigen::Index t = argmax[static_cast<std::size_t>(s)];
                    (over_rows ? px.grad(t, s) : px.grad(s, t)) += g;
                    continue;
                }
                const double share = kind == ReduceKind::mean ? g / static_cast<double>(length) : g;
                if (over_rows) {
                    px.grad.col(s).array() += share;
                } else {
                    px.grad.row(s).array() += share;
                }
            }
        });
}

Tensor sum_all(const Tensor& x) {
    Matrix out(1, 1);
    out(0, 0) = x.value().sum();
    return Tensor::from_op(std::move(out), {x}, [](Node& self) {
        parent(self, 0).grad.array() += self.grad(0, 0);
    });
}

Tensor normalize_columns(const Tensor& x) {
    const Matrix& v = x.value();
    Eigen::RowVectorXd norms = v.colwise().norm();
    for (Eigen::Index j = 0; j < norms.size(); ++j) {
        if (!(norms(j) > 0.0)) {
            throw NormalizationError("normalize_columns: column " + std::to_string(j) +
                                     " has zero norm");
        }
    }
    Matrix out = v.array().rowwise() / norms.array();
    return Tensor::from_op(std::move(out), {x}, [norms](Node& self) {
        // d(p/|p|) = (g - u (u . g)) / |p| per column, u the unit column.
        Node& px = parent(self, 0);
        const Eigen::RowVectorXd proj = self.value.cwiseProduct(self.grad).colwise().sum();
        Matrix delta = self.grad - (self.value.array().rowwise() * proj.array()).matrix();
        px.grad.array() += delta.array().rowwise() / norms.array();
    });
}

Matrix softmax_row(const Matrix& logits) {
    const double shift = logits.maxCoeff();
    Matrix e = (logits.array() - shift).exp();
    return e / e.sum();
}

Tensor cross_entropy(const Tensor& logits, std::size_t label) {
    if (logits.rows() != 1 || logits.cols() < 2) {
        throw ShapeError("cross_entropy: expected 1xC logits with C >= 2, got " +
                         logits.shape_str());
    }
    if (label >= static_cast<std::size_t>(logits.cols())) {
        throw IndexError("cross_entropy: label " + std::to_string(label) + " out of range for " +
                         std::to_string(logits.cols()) + " classes");
    }
    const Matrix& z = logits.value();
    const double shift = z.maxCoeff();
    const double log_norm = std::log((z.array() - shift).exp().sum()) + shift;
    Matrix out(1, 1);
    out(0, 0) = log_norm - z(0, static_cast<Eigen::Index>(label));
    return Tensor::from_op(std::move(out), {logits}, [label](Node& self) {
        Node& p = parent(self, 0);
        Matrix probs = softmax_row(p.value);
        probs(0, static_cast<Eigen::Index>(label)) -= 1.0;
        p.grad += self.grad(0, 0) * probs;
    });
}

Tensor mse_loss(const Tensor& prediction, const Matrix& target) {
    if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
        throw DimensionError("mse_loss: prediction " + prediction.shape_str() +
                             " vs target (" + std::to_string(target.rows()) + "x" +
                             std::to_string(target.cols()) + ")");
    }
    const double count = static_cast<double>(target.size());
    Matrix diff = prediction.value() - target;
    Matrix out(1, 1);
    out(0, 0) = diff.squaredNorm() / count;
    return Tensor::from_op(std::move(out), {prediction},
                           [diff = std::move(diff), count](Node& self) {
                               parent(self, 0).grad += (2.0 * self.grad(0, 0) / count) * diff;
                           });
}

}  // namespace midpool::autodiff
