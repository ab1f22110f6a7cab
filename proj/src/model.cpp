#include "fewgraph/model.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "fewgraph/errors.hpp"

namespace fewgraph {

namespace {

constexpr double kTiny = 1e-300;

void check_vocab(const ModelParams& p, const Vocabulary& v) {
    if (p.comp_sizes != v.component_sizes() || p.input_dim != v.total_tokens())
        throw DataError("model and vocabulary dimensions do not match");
}

} // namespace

ModelParams ModelParams::create(const Vocabulary& v, ModelDims dims) {
    ModelParams p;
    p.dims = dims;
    p.comp_sizes = v.component_sizes();
    p.input_dim = v.total_tokens();
    const int d = dims.embed, h = dims.hidden, hh = dims.head_hidden;
    p.emb_w = Tensor(d, p.input_dim);
    p.emb_b = Tensor(d, 1);
    for (Tensor* t : {&p.w_in, &p.w_fg, &p.w_out, &p.w_cd}) *t = Tensor(h, d);
    for (Tensor* t : {&p.u_in, &p.u_fg, &p.u_out, &p.u_cd}) *t = Tensor(h, h);
    for (Tensor* t : {&p.b_in, &p.b_fg, &p.b_out, &p.b_cd}) *t = Tensor(h, 1);
    for (int k = 0; k < 5; ++k) {
        p.head_w1[static_cast<std::size_t>(k)] = Tensor(hh, h);
        p.head_b1[static_cast<std::size_t>(k)] = Tensor(hh, 1);
        p.head_w2[static_cast<std::size_t>(k)] = Tensor(p.comp_sizes[static_cast<std::size_t>(k)], hh);
        p.head_b2[static_cast<std::size_t>(k)] = Tensor(p.comp_sizes[static_cast<std::size_t>(k)], 1);
    }
    return p;
}

ModelParams ModelParams::init_random(const Vocabulary& v, ModelDims dims, std::uint64_t seed) {
    ModelParams p = create(v, dims);
    Rng rng(seed);
    auto init_matrix = [&](Tensor& t) {
        const double r = 1.0 / std::sqrt(static_cast<double>(t.cols));
        for (double& x : t.v) x = (2.0 * rng.uniform() - 1.0) * r;
    };
    init_matrix(p.emb_w);
    for (Tensor* t : {&p.w_in, &p.w_fg, &p.w_out, &p.w_cd, &p.u_in, &p.u_fg, &p.u_out, &p.u_cd})
        init_matrix(*t);
    for (auto& t : p.head_w1) init_matrix(t);
    for (auto& t : p.head_w2) init_matrix(t);
    std::fill(p.b_fg.v.begin(), p.b_fg.v.end(), 1.0);
    return p;
}

std::vector<Tensor*> tensor_list(ModelParams& p) {
    std::vector<Tensor*> out{&p.emb_w, &p.emb_b, &p.w_in, &p.u_in, &p.b_in, &p.w_fg, &p.u_fg,
                             &p.b_fg, &p.w_out, &p.u_out, &p.b_out, &p.w_cd, &p.u_cd, &p.b_cd};
    for (int k = 0; k < 5; ++k) {
        out.push_back(&p.head_w1[static_cast<std::size_t>(k)]);
        out.push_back(&p.head_b1[static_cast<std::size_t>(k)]);
        out.push_back(&p.head_w2[static_cast<std::size_t>(k)]);
        out.push_back(&p.head_b2[static_cast<std::size_t>(k)]);
    }
    return out;
}

std::vector<const Tensor*> tensor_list(const ModelParams& p) {
    auto mut = tensor_list(const_cast<ModelParams&>(p));
    return {mut.begin(), mut.end()};
}

std::vector<std::pair<std::string, Tensor*>> named_tensor_list(ModelParams& p) {
    std::vector<std::pair<std::string, Tensor*>> out{
        {"emb.w", &p.emb_w},   {"emb.b", &p.emb_b},   {"lstm.w_in", &p.w_in},
        {"lstm.u_in", &p.u_in}, {"lstm.b_in", &p.b_in}, {"lstm.w_fg", &p.w_fg},
        {"lstm.u_fg", &p.u_fg}, {"lstm.b_fg", &p.b_fg}, {"lstm.w_out", &p.w_out},
        {"lstm.u_out", &p.u_out}, {"lstm.b_out", &p.b_out}, {"lstm.w_cd", &p.w_cd},
        {"lstm.u_cd", &p.u_cd}, {"lstm.b_cd", &p.b_cd}};
    const char* head_names[5] = {"t_u", "t_v", "l_u", "l_uv", "l_v"};
    for (int k = 0; k < 5; ++k) {
        std::string base = std::string("head.") + head_names[k];
        out.emplace_back(base + ".w1", &p.head_w1[static_cast<std::size_t>(k)]);
        out.emplace_back(base + ".b1", &p.head_b1[static_cast<std::size_t>(k)]);
        out.emplace_back(base + ".w2", &p.head_w2[static_cast<std::size_t>(k)]);
        out.emplace_back(base + ".b2", &p.head_b2[static_cast<std::size_t>(k)]);
    }
    return out;
}

std::size_t ModelParams::coefficient_count() const {
    std::size_t n = 0;
    for (const Tensor* t : tensor_list(*this)) n += t->size();
    return n;
}

bool ModelParams::shape_matches(const ModelParams& other) const {
    if (!(dims == other.dims) || comp_sizes != other.comp_sizes || input_dim != other.input_dim)
        return false;
    auto a = tensor_list(*this);
    auto b = tensor_list(other);
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i]->rows != b[i]->rows || a[i]->cols != b[i]->cols) return false;
    return true;
}

void fill_zero(ModelParams& p) {
    for (Tensor* t : tensor_list(p)) t->zero();
}

void axpy(double a, const ModelParams& x, ModelParams& y) {
    if (!x.shape_matches(y)) throw DataError("parameter shape mismatch");
    auto xs = tensor_list(x);
    auto ys = tensor_list(y);
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs[i]->size(); ++j) ys[i]->v[j] += a * xs[i]->v[j];
}

void scale(double a, ModelParams& y) {
    for (Tensor* t : tensor_list(y))
        for (double& x : t->v) x *= a;
}

double max_abs_difference(const ModelParams& a, const ModelParams& b) {
    auto as = tensor_list(a);
    auto bs = tensor_list(b);
    double m = 0.0;
    for (std::size_t i = 0; i < as.size(); ++i)
        for (std::size_t j = 0; j < as[i]->size(); ++j)
            m = std::max(m, std::abs(as[i]->v[j] - bs[i]->v[j]));
    return m;
}

bool params_equal(const ModelParams& a, const ModelParams& b) {
    if (!a.shape_matches(b)) return false;
    auto as = tensor_list(a);
    auto bs = tensor_list(b);
    for (std::size_t i = 0; i < as.size(); ++i)
        if (as[i]->v != bs[i]->v) return false;
    return true;
}

bool all_finite(const ModelParams& p) {
    for (const Tensor* t : tensor_list(p))
        for (double x : t->v)
            if (!std::isfinite(x)) return false;
    return true;
}

HiddenState initial_state(const ModelParams& p) {
    HiddenState s;
    s.h.assign(static_cast<std::size_t>(p.dims.hidden), 0.0);
    s.c.assign(static_cast<std::size_t>(p.dims.hidden), 0.0);
    return s;
}

namespace {

// Gathered embedding: e = emb_b + sum of hot columns of emb_w.
void embed(const ModelParams& p, const TokenIndices& x, const std::array<int, 5>& offsets,
           std::vector<double>& e) {
    e.assign(p.emb_b.v.begin(), p.emb_b.v.end());
    if (x.sos) return;
    for (int k = 0; k < 5; ++k) {
        const int col = offsets[static_cast<std::size_t>(k)] + x.idx[static_cast<std::size_t>(k)];
        for (int r = 0; r < p.dims.embed; ++r)
            e[static_cast<std::size_t>(r)] += p.emb_w.at(r, col);
    }
}

void dropout_mask(std::vector<double>& mask, std::size_t n, double p, Rng& rng) {
    mask.resize(n);
    const double keep_scale = 1.0 / (1.0 - p);
    for (std::size_t i = 0; i < n; ++i) mask[i] = rng.uniform() < p ? 0.0 : keep_scale;
}

void apply_mask(const std::vector<double>& mask, const std::vector<double>& x,
                std::vector<double>& out) {
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * mask[i];
}

struct CellOut {
    std::vector<double> gi, gf, go, gg, c, tanh_c, h;
};

void lstm_cell(const ModelParams& p, const std::vector<double>& e, const std::vector<double>& h_prev,
               const std::vector<double>& c_prev, CellOut& out) {
    const std::size_t h = static_cast<std::size_t>(p.dims.hidden);
    auto gate = [&](const Tensor& w, const Tensor& u, const Tensor& b, std::vector<double>& g) {
        g.assign(b.v.begin(), b.v.end());
        gemv_add(w, e, g);
        gemv_add(u, h_prev, g);
    };
    gate(p.w_in, p.u_in, p.b_in, out.gi);
    gate(p.w_fg, p.u_fg, p.b_fg, out.gf);
    gate(p.w_out, p.u_out, p.b_out, out.go);
    gate(p.w_cd, p.u_cd, p.b_cd, out.gg);
    for (std::size_t i = 0; i < h; ++i) {
        out.gi[i] = sigmoid(out.gi[i]);
        out.gf[i] = sigmoid(out.gf[i]);
        out.go[i] = sigmoid(out.go[i]);
        out.gg[i] = std::tanh(out.gg[i]);
    }
    out.c.resize(h);
    out.tanh_c.resize(h);
    out.h.resize(h);
    for (std::size_t i = 0; i < h; ++i) {
        out.c[i] = out.gf[i] * c_prev[i] + out.gi[i] * out.gg[i];
        out.tanh_c[i] = std::tanh(out.c[i]);
        out.h[i] = out.go[i] * out.tanh_c[i];
    }
}

void head_forward(const ModelParams& p, int k, const std::vector<double>& h,
                  std::vector<double>& u, std::vector<double>& z) {
    const auto ku = static_cast<std::size_t>(k);
    u.assign(p.head_b1[ku].v.begin(), p.head_b1[ku].v.end());
    gemv_add(p.head_w1[ku], h, u);
    for (double& x : u) x = std::tanh(x);
    z.assign(p.head_b2[ku].v.begin(), p.head_b2[ku].v.end());
    gemv_add(p.head_w2[ku], u, z);
}

// Full-form BCE over one softmaxed head. Branches on the target bit so a
// saturated correct prediction yields exactly zero.
double head_bce(const std::vector<double>& probs, int target) {
    double loss = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        if (static_cast<int>(c) == target)
            loss -= std::log(std::max(probs[c], kTiny));
        else
            loss -= std::log(std::max(1.0 - probs[c], kTiny));
    }
    return loss;
}

// dL/dz for softmax probs under the full BCE; matches head_bce's clamping.
void head_bce_grad(const std::vector<double>& probs, int target, std::vector<double>& dz) {
    const std::size_t n = probs.size();
    std::vector<double> g(n);
    double s = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        g[c] = static_cast<int>(c) == target ? -1.0 / std::max(probs[c], kTiny)
                                             : 1.0 / std::max(1.0 - probs[c], kTiny);
        s += g[c] * probs[c];
    }
    dz.resize(n);
    for (std::size_t c = 0; c < n; ++c) dz[c] = probs[c] * (g[c] - s);
}

struct StepTrace {
    TokenIndices input;
    TokenIndices target;
    std::vector<double> emb_raw, emb;      // pre/post dropout
    std::vector<double> mask_e, mask_h;
    CellOut cell;
    std::vector<double> h_heads;           // post dropout
    std::array<std::vector<double>, 5> head_u, head_p;
};

} // namespace

StepResult forward_step(const ModelParams& p, const HiddenState& state, const TokenIndices& x,
                        RunMode mode, double dropout, Rng* rng) {
    if (static_cast<int>(state.h.size()) != p.dims.hidden)
        throw DataError("hidden state width mismatch");
    std::array<int, 5> offsets{};
    for (int k = 1; k < 5; ++k)
        offsets[static_cast<std::size_t>(k)] = offsets[static_cast<std::size_t>(k - 1)] +
                                               p.comp_sizes[static_cast<std::size_t>(k - 1)];
    std::vector<double> e;
    embed(p, x, offsets, e);
    const bool use_dropout = mode == RunMode::train && dropout > 0.0;
    std::vector<double> mask;
    if (use_dropout) {
        if (!rng) throw ConfigError("dropout requires an rng");
        dropout_mask(mask, e.size(), dropout, *rng);
        for (std::size_t i = 0; i < e.size(); ++i) e[i] *= mask[i];
    }
    CellOut cell;
    lstm_cell(p, e, state.h, state.c, cell);
    std::vector<double> h_heads = cell.h;
    if (use_dropout) {
        dropout_mask(mask, h_heads.size(), dropout, *rng);
        for (std::size_t i = 0; i < h_heads.size(); ++i) h_heads[i] *= mask[i];
    }
    StepResult out;
    out.state.h = cell.h;
    out.state.c = cell.c;
    for (int k = 0; k < 5; ++k) {
        std::vector<double> u;
        head_forward(p, k, h_heads, u, out.logits[static_cast<std::size_t>(k)]);
    }
    return out;
}

std::array<std::vector<double>, 5> head_distributions(const StepResult& step) {
    auto probs = step.logits;
    for (auto& z : probs) softmax(z);
    return probs;
}

double sequence_loss(const ModelParams& p, const DfsCode& code, const Vocabulary& v) {
    return sequence_loss_grad(p, code, v, RunMode::eval, 0.0, 0, nullptr);
}

double sequence_loss_grad(const ModelParams& p, const DfsCode& code, const Vocabulary& v,
                          RunMode mode, double dropout, std::uint64_t mask_seed,
                          ModelParams* grad) {
    check_vocab(p, v);
    const auto offsets = v.offsets();
    const int steps = static_cast<int>(code.size()) + 1;   // tuples plus the EOS step
    const bool use_dropout = mode == RunMode::train && dropout > 0.0;
    Rng rng(mask_seed);

    std::vector<StepTrace> trace(static_cast<std::size_t>(steps));
    HiddenState state = initial_state(p);
    double loss = 0.0;

    for (int i = 0; i < steps; ++i) {
        StepTrace& t = trace[static_cast<std::size_t>(i)];
        t.input = i == 0 ? TokenIndices::start() : TokenIndices::from_tuple(code[static_cast<std::size_t>(i - 1)], v);
        t.target = i == steps - 1 ? TokenIndices::end_of_sequence(v)
                                  : TokenIndices::from_tuple(code[static_cast<std::size_t>(i)], v);

        embed(p, t.input, offsets, t.emb_raw);
        if (use_dropout) {
            dropout_mask(t.mask_e, t.emb_raw.size(), dropout, rng);
            apply_mask(t.mask_e, t.emb_raw, t.emb);
        } else {
            t.emb = t.emb_raw;
        }
        lstm_cell(p, t.emb, state.h, state.c, t.cell);
        if (use_dropout) {
            dropout_mask(t.mask_h, t.cell.h.size(), dropout, rng);
            apply_mask(t.mask_h, t.cell.h, t.h_heads);
        } else {
            t.h_heads = t.cell.h;
        }
        for (int k = 0; k < 5; ++k) {
            auto& z = t.head_p[static_cast<std::size_t>(k)];
            head_forward(p, k, t.h_heads, t.head_u[static_cast<std::size_t>(k)], z);
            softmax(z);
            loss += head_bce(z, t.target.idx[static_cast<std::size_t>(k)]);
        }
        state.h = t.cell.h;
        state.c = t.cell.c;
    }
    if (!std::isfinite(loss)) throw NumericError("non-finite sequence loss");
    if (!grad) return loss;

    // backward pass
    const std::size_t hdim = static_cast<std::size_t>(p.dims.hidden);
    const std::vector<double> zeros(hdim, 0.0);
    std::vector<double> dh_rec(hdim, 0.0), dc_rec(hdim, 0.0);
    std::vector<double> dz, du, dh_heads(hdim), dh(hdim), dc(hdim), da(hdim), de;

    for (int i = steps - 1; i >= 0; --i) {
        StepTrace& t = trace[static_cast<std::size_t>(i)];
        std::fill(dh_heads.begin(), dh_heads.end(), 0.0);
        for (int k = 0; k < 5; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            head_bce_grad(t.head_p[ku], t.target.idx[ku], dz);
            outer_add(grad->head_w2[ku], dz, t.head_u[ku]);
            add_to(grad->head_b2[ku].v, dz);
            du.assign(t.head_u[ku].size(), 0.0);
            gemv_t_add(p.head_w2[ku], dz, du);
            for (std::size_t j = 0; j < du.size(); ++j)
                du[j] *= 1.0 - t.head_u[ku][j] * t.head_u[ku][j];
            outer_add(grad->head_w1[ku], du, t.h_heads);
            add_to(grad->head_b1[ku].v, du);
            gemv_t_add(p.head_w1[ku], du, dh_heads);
        }
        // dh = heads path (through the dropout mask) + recurrent path
        for (std::size_t j = 0; j < hdim; ++j) {
            const double m = use_dropout ? t.mask_h[j] : 1.0;
            dh[j] = dh_heads[j] * m + dh_rec[j];
        }
        const std::vector<double>& c_prev =
            i == 0 ? zeros : trace[static_cast<std::size_t>(i - 1)].cell.c;
        const std::vector<double>& h_prev =
            i == 0 ? zeros : trace[static_cast<std::size_t>(i - 1)].cell.h;

        // gate backward
        std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
        de.assign(t.emb.size(), 0.0);
        for (std::size_t j = 0; j < hdim; ++j)
            dc[j] = dc_rec[j] + dh[j] * t.cell.go[j] * (1.0 - t.cell.tanh_c[j] * t.cell.tanh_c[j]);

        auto gate_back = [&](const std::vector<double>& dgate_pre, const Tensor& w, const Tensor& u,
                             Tensor& gw, Tensor& gu, Tensor& gb) {
            outer_add(gw, dgate_pre, t.emb);
            outer_add(gu, dgate_pre, h_prev);
            add_to(gb.v, dgate_pre);
            gemv_t_add(w, dgate_pre, de);
            gemv_t_add(u, dgate_pre, dh_rec);
        };

        for (std::size_t j = 0; j < hdim; ++j)
            da[j] = dh[j] * t.cell.tanh_c[j] * t.cell.go[j] * (1.0 - t.cell.go[j]);
        gate_back(da, p.w_out, p.u_out, grad->w_out, grad->u_out, grad->b_out);

        for (std::size_t j = 0; j < hdim; ++j)
            da[j] = dc[j] * c_prev[j] * t.cell.gf[j] * (1.0 - t.cell.gf[j]);
        gate_back(da, p.w_fg, p.u_fg, grad->w_fg, grad->u_fg, grad->b_fg);

        for (std::size_t j = 0; j < hdim; ++j)
            da[j] = dc[j] * t.cell.gg[j] * t.cell.gi[j] * (1.0 - t.cell.gi[j]);
        gate_back(da, p.w_in, p.u_in, grad->w_in, grad->u_in, grad->b_in);

        for (std::size_t j = 0; j < hdim; ++j)
            da[j] = dc[j] * t.cell.gi[j] * (1.0 - t.cell.gg[j] * t.cell.gg[j]);
        gate_back(da, p.w_cd, p.u_cd, grad->w_cd, grad->u_cd, grad->b_cd);

        for (std::size_t j = 0; j < hdim; ++j) dc_rec[j] = dc[j] * t.cell.gf[j];

        // embedding backward (through the dropout mask, then the gather)
        if (use_dropout)
            for (std::size_t j = 0; j < de.size(); ++j) de[j] *= t.mask_e[j];
        add_to(grad->emb_b.v, de);
        if (!t.input.sos) {
            for (int k = 0; k < 5; ++k) {
                const int col = offsets[static_cast<std::size_t>(k)] +
                                t.input.idx[static_cast<std::size_t>(k)];
                for (int r = 0; r < p.dims.embed; ++r)
                    grad->emb_w.at(r, col) += de[static_cast<std::size_t>(r)];
            }
        }
    }
    return loss;
}

AdamState AdamState::create(const ModelParams& like) {
    AdamState s;
    s.m = like;
    s.v = like;
    fill_zero(s.m);
    fill_zero(s.v);
    s.step = 0;
    return s;
}

void adam_step(ModelParams& p, const ModelParams& grad, AdamState& state, const TrainConfig& cfg) {
    if (!p.shape_matches(grad)) throw DataError("gradient shape mismatch");
    if (!all_finite(grad)) throw NumericError("non-finite gradient");
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto ps = tensor_list(p);
    auto gs = tensor_list(grad);
    auto ms = tensor_list(state.m);
    auto vs = tensor_list(state.v);
    for (std::size_t t = 0; t < ps.size(); ++t) {
        for (std::size_t j = 0; j < ps[t]->size(); ++j) {
            const double g = gs[t]->v[j] + cfg.l2 * ps[t]->v[j];
            double& m = ms[t]->v[j];
            double& vv = vs[t]->v[j];
            m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
            vv = cfg.beta2 * vv + (1.0 - cfg.beta2) * g * g;
            const double mhat = m / bc1;
            const double vhat = vv / bc2;
            ps[t]->v[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
        }
    }
}

namespace {

template <typename Fn>
void parallel_slots(int count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    const int workers = std::min(threads, count);
    std::vector<std::future<void>> futs;
    futs.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        futs.push_back(std::async(std::launch::async, [&, w] {
            for (int i = w; i < count; i += workers) fn(i);
        }));
    }
    for (auto& f : futs) f.get();
}

} // namespace

double batch_gradient(const ModelParams& p, std::span<const DfsCode* const> batch,
                      const Vocabulary& v, RunMode mode, double dropout,
                      std::uint64_t batch_seed, int threads, ModelParams& grad_out) {
    fill_zero(grad_out);
    const int n = static_cast<int>(batch.size());
    if (n == 0) return 0.0;
    const int workers = std::max(1, std::min(threads, n));
    std::vector<ModelParams> partial;
    partial.reserve(static_cast<std::size_t>(workers > 1 ? workers : 0));
    for (int w = 1; w < workers; ++w) {
        partial.push_back(p);
        fill_zero(partial.back());
    }
    std::vector<double> losses(static_cast<std::size_t>(n), 0.0);
    parallel_slots(workers, workers, [&](int w) {
        ModelParams& acc = w == 0 ? grad_out : partial[static_cast<std::size_t>(w - 1)];
        for (int i = w; i < n; i += workers)
            losses[static_cast<std::size_t>(i)] =
                sequence_loss_grad(p, *batch[static_cast<std::size_t>(i)], v, mode, dropout,
                                   mix_seed(batch_seed, static_cast<std::uint64_t>(i)), &acc);
    });
    for (auto& part : partial) axpy(1.0, part, grad_out);
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum;
}

void per_sequence_loss_grads(const ModelParams& p, std::span<const DfsCode* const> batch,
                             const Vocabulary& v, RunMode mode, double dropout,
                             std::uint64_t batch_seed, int threads,
                             std::vector<double>& losses, std::vector<ModelParams>& grads) {
    const int n = static_cast<int>(batch.size());
    losses.assign(static_cast<std::size_t>(n), 0.0);
    while (static_cast<int>(grads.size()) < n) grads.push_back(p);
    parallel_slots(n, threads, [&](int i) {
        fill_zero(grads[static_cast<std::size_t>(i)]);
        losses[static_cast<std::size_t>(i)] =
            sequence_loss_grad(p, *batch[static_cast<std::size_t>(i)], v, mode, dropout,
                               mix_seed(batch_seed, static_cast<std::uint64_t>(i)),
                               &grads[static_cast<std::size_t>(i)]);
    });
}

double mean_sequence_loss(const ModelParams& p, std::span<const DfsCode> codes,
                          const Vocabulary& v, int threads) {
    if (codes.empty()) throw DataError("cannot evaluate an empty code set");
    std::vector<double> losses(codes.size(), 0.0);
    parallel_slots(static_cast<int>(codes.size()), threads, [&](int i) {
        losses[static_cast<std::size_t>(i)] = sequence_loss(p, codes[static_cast<std::size_t>(i)], v);
    });
    double sum = 0.0;
    for (double l : losses) sum += l;
    return sum / static_cast<double>(codes.size());
}

ModelParams train_epochs(ModelParams p, std::span<const DfsCode> train_codes,
                         const TrainConfig& cfg, std::span<const DfsCode> val_codes,
                         const Vocabulary& v, std::vector<EpochLogEntry>* log) {
    if (train_codes.empty()) throw DataError("cannot train on an empty code set");
    if (!(cfg.lr > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(cfg.dropout >= 0.0 && cfg.dropout < 1.0)) throw ConfigError("dropout must lie in [0,1)");
    if (cfg.batch_size < 1) throw ConfigError("batch size must be at least 1");
    std::span<const DfsCode> val = val_codes.empty() ? train_codes : val_codes;

    AdamState adam = AdamState::create(p);
    ModelParams grad = p;
    ModelParams best = p;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    double prev_val = std::numeric_limits<double>::infinity();
    int flat_epochs = 0;

    std::vector<int> order(train_codes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const DfsCode*> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i)
                batch.push_back(&train_codes[static_cast<std::size_t>(order[i])]);
            const std::uint64_t bseed =
                mix_seed(mix_seed(cfg.seed, 0x9e3779b9u + static_cast<std::uint64_t>(epoch)),
                         static_cast<std::uint64_t>(batches));
            double loss = batch_gradient(p, batch, v, RunMode::train, cfg.dropout, bseed,
                                         cfg.threads, grad);
            if (cfg.batch_mean) scale(1.0 / static_cast<double>(batch.size()), grad);
            adam_step(p, grad, adam, cfg);
            epoch_loss += loss;
            ++batches;
        }
        const double val_loss = mean_sequence_loss(p, val, v, cfg.threads);
        if (log) log->push_back(EpochLogEntry{epoch, epoch_loss / static_cast<double>(train_codes.size()), val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            best = p;
            best_epoch = epoch;
        }
        if (cfg.patience == 0) break;
        if (epoch - best_epoch >= cfg.patience) break;
        const double rel = std::abs(val_loss - prev_val) / std::max(std::abs(prev_val), 1e-12);
        flat_epochs = rel < cfg.stop_rel_change ? flat_epochs + 1 : 0;
        if (flat_epochs >= cfg.patience) break;
        prev_val = val_loss;
    }
    return best;
}

} // namespace fewgraph
