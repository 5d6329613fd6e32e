#include "bsr/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

#include "bsr/errors.hpp"

namespace bsr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kRefreshStride = 4096;

const char* move_name(MoveKind k) {
    switch (k) {
        case MoveKind::H: return "H";
        case MoveKind::HPlus: return "H+";
        case MoveKind::HMinus: return "H-";
        case MoveKind::Ima: return "IMA";
    }
    return "?";
}

}  // namespace

MoveProbabilities move_probabilities(int n, double c, const OrderDistribution& dist) {
    const double pn = dist.pmf(n);
    MoveProbabilities mp;
    mp.up = c * std::min(1.0, dist.pmf_or_zero(n + 1) / pn);
    mp.down = c * std::min(1.0, dist.pmf_or_zero(n - 1) / pn);
    mp.h = 1.0 - mp.up - mp.down;
    return mp;
}

void SamplerConfig::validate() const {
    if (!(c >= 0.0 && c <= 0.5)) throw ConfigError("sampler c must lie in [0, 1/2]");
    if (updates <= 0) throw ConfigError("updates must be positive");
    if (burn_in < 0 || burn_in >= updates) throw ConfigError("need 0 <= burn_in < updates");
    if (thinning < 1) throw ConfigError("thinning must be >= 1");
}

std::span<const double> ChainTrace::state_coeffs(std::size_t i) const {
    if (offsets.size() != orders.size() + 1)
        throw DegenerateInputError("trace carries no coefficient storage");
    return std::span<const double>(coeff_data.data() + offsets[i], offsets[i + 1] - offsets[i]);
}

BernsteinPoly ChainTrace::state(std::size_t i) const {
    const auto c = state_coeffs(i);
    return BernsteinPoly(std::vector<double>(c.begin(), c.end()), tau);
}

double ChainTrace::acceptance_rate() const {
    std::int64_t prop = 0, acc = 0;
    for (const auto& t : tallies) {
        prop += t.proposed;
        acc += t.accepted;
    }
    return prop == 0 ? 0.0 : static_cast<double>(acc) / static_cast<double>(prop);
}

void ChainTrace::append(int order, std::span<const double> coeffs) {
    if (offsets.empty()) offsets.push_back(0);
    orders.push_back(order);
    coeff_data.insert(coeff_data.end(), coeffs.begin(), coeffs.end());
    offsets.push_back(coeff_data.size());
}

ChainState make_chain_state(PriorDraw draw, const Dataset& d, const PriorSpec& spec,
                            double sigma_sq, bool flat_likelihood) {
    ChainState s{std::move(draw), 0.0, 0.0};
    s.log_lik = flat_likelihood ? 0.0 : log_likelihood(d, s.draw.poly, sigma_sq);
    s.log_prior =
        spec.shape == ShapeKind::Monotone ? isotonic_prior_logdensity(s.draw.poly, spec) : 0.0;
    return s;
}

namespace {

// Single-coordinate feasibility window for the concave constraint system.
// Bounds: the second differences touching k, the strict endpoint slopes, the
// beta endpoint bounds and the q box on the running maximum.
Interval concave_interval(std::span<const double> a, int k, const Interval& q, double b1,
                          double b2) {
    const int n = static_cast<int>(a.size()) - 1;
    double second_max = kNegInf;
    for (int i = 0; i <= n; ++i)
        if (i != k) second_max = std::max(second_max, a[i]);

    double lo = kNegInf, hi = std::numeric_limits<double>::infinity();
    if (k == 0) {
        hi = std::min(a[1], 2.0 * a[1] - a[2]);
        lo = 2.0 * b1 - second_max;
    } else if (k == n) {
        hi = std::min(a[n - 1], 2.0 * a[n - 1] - a[n - 2]);
        lo = 2.0 * b2 - second_max;
    } else {
        lo = (a[k - 1] + a[k + 1]) / 2.0;
        if (k == 1) lo = std::max(lo, a[0]);
        if (k == n - 1) lo = std::max(lo, a[n]);
        if (k >= 2) hi = std::min(hi, 2.0 * a[k - 1] - a[k - 2]);
        if (k <= n - 2) hi = std::min(hi, 2.0 * a[k + 1] - a[k + 2]);
        hi = std::min(hi, q.hi);
        if (second_max < q.lo) lo = std::max(lo, q.lo);
        if (second_max < 2.0 * b1 - a[0]) lo = std::max(lo, 2.0 * b1 - a[0]);
        if (second_max < 2.0 * b2 - a[n]) lo = std::max(lo, 2.0 * b2 - a[n]);
    }
    return Interval{lo, hi};
}

}  // namespace

Interval shape_feasible_interval(std::span<const double> coeffs, int k, const PriorSpec& spec) {
    const int n = static_cast<int>(coeffs.size()) - 1;
    if (n < 2) throw DegenerateInputError("feasible interval needs order >= 2");
    if (k < 0 || k > n) throw DomainError("coefficient index outside 0..n");
    if (spec.shape == ShapeKind::UnimodalConcave)
        return concave_interval(coeffs, k, spec.q, spec.beta1, spec.beta2);
    if (spec.shape == ShapeKind::UnimodalConvex) {
        thread_local std::vector<double> neg;
        neg.assign(coeffs.begin(), coeffs.end());
        for (double& v : neg) v = -v;
        const Interval mq{-spec.q.hi, -spec.q.lo};
        const Interval iv = concave_interval(neg, k, mq, -spec.beta1, -spec.beta2);
        return Interval{-iv.hi, -iv.lo};
    }
    throw ConfigError("feasible interval is defined for concave/convex shapes only");
}

bool shape_state_feasible(std::span<const double> coeffs, const PriorSpec& spec) {
    if (spec.shape == ShapeKind::UnimodalConcave) {
        if (!shape_check(coeffs, ShapeKind::UnimodalConcave)) return false;
        const double peak = *std::max_element(coeffs.begin(), coeffs.end());
        if (!spec.q.contains(peak)) return false;
        return coeffs.front() >= 2.0 * spec.beta1 - peak && coeffs.back() >= 2.0 * spec.beta2 - peak;
    }
    if (spec.shape == ShapeKind::UnimodalConvex) {
        if (!shape_check(coeffs, ShapeKind::UnimodalConvex)) return false;
        const double trough = *std::min_element(coeffs.begin(), coeffs.end());
        if (!spec.q.contains(trough)) return false;
        return coeffs.front() <= 2.0 * spec.beta1 - trough && coeffs.back() <= 2.0 * spec.beta2 - trough;
    }
    throw ConfigError("state feasibility is defined for concave/convex shapes only");
}

Chain::Chain(const Dataset& d, const PriorSpec& spec, const SamplerConfig& cfg, double sigma_sq)
    : data_(&d), spec_(spec), cfg_(cfg), sigma_sq_(sigma_sq) {
    d.validate();
    cfg_.validate();
    if (d.tau != spec.tau) throw ConfigError("dataset and prior domains differ");
    if (!cfg_.flat_likelihood && !(sigma_sq > 0.0)) throw ConfigError("sigma^2 must be positive");
    for (std::size_t k = 0; k < d.num_groups(); ++k) {
        for (double y : d.ys[k]) {
            obs_x_.push_back(d.xs[k]);
            obs_y_.push_back(y);
        }
    }
    if (spec_.shape == ShapeKind::Monotone && cfg_.kind == SamplerConfig::Kind::Mhra &&
        (cfg_.m1 > spec_.q1.lo || cfg_.m2 < spec_.q2.hi))
        throw ConfigError("H-move bounds must bracket the coefficient support: M1 <= q1.lo, M2 >= q2.hi");
    basis_.resize(spec.order_dist.max_order() + 1);
    loglik_norm_ = -0.5 * static_cast<double>(obs_x_.size()) *
                   std::log(2.0 * 3.14159265358979323846 * sigma_sq_);
}

const std::vector<double>& Chain::basis_for(int n) {
    if (n < 1 || n >= static_cast<int>(basis_.size())) throw DomainError("order outside prior support");
    auto& b = basis_[n];
    if (b.empty()) {
        const std::size_t m = obs_x_.size();
        b.resize(static_cast<std::size_t>(n + 1) * m);
        std::vector<double> row(n + 1);
        for (std::size_t o = 0; o < m; ++o) {
            basis_row(n, obs_x_[o] / spec_.tau, row);
            for (int i = 0; i <= n; ++i) b[static_cast<std::size_t>(i) * m + o] = row[i];
        }
    }
    return b;
}

double Chain::ssr_from(std::span<const double> coeffs, const std::vector<double>& basis,
                       std::vector<double>& resid_out) const {
    const std::size_t m = obs_x_.size();
    resid_out.assign(obs_y_.begin(), obs_y_.end());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const double ci = coeffs[i];
        const double* col = basis.data() + i * m;
        for (std::size_t o = 0; o < m; ++o) resid_out[o] -= ci * col[o];
    }
    double ssr = 0.0;
    for (std::size_t o = 0; o < m; ++o) ssr += resid_out[o] * resid_out[o];
    return ssr;
}

double Chain::log_lik_from_ssr(double ssr) const {
    return cfg_.flat_likelihood ? 0.0 : loglik_norm_ - ssr / (2.0 * sigma_sq_);
}

double Chain::log_lik() const { return log_lik_from_ssr(ssr_); }

void Chain::init(const PriorDraw& draw) {
    if (draw.poly.domain_end() != spec_.tau) throw ConfigError("draw domain differs from the prior");
    const auto& c = draw.poly.coeffs();
    if (!shape_check(c, spec_.shape)) throw ConfigError("initial state violates the shape constraint");
    a_ = c;
    n_ = draw.poly.order();
    if (spec_.shape == ShapeKind::Monotone) {
        peak_ = -1;
    } else {
        if (!shape_state_feasible(a_, spec_))
            throw ConfigError("initial state outside the prior support");
        peak_ = draw.peak_index;
    }
    refresh_caches();
    if (spec_.shape == ShapeKind::Monotone && log_prior_ == kNegInf)
        throw ConfigError("initial isotonic state has zero prior density");
}

void Chain::init_from_prior(Rng& rng) { init(sample_prior(spec_, rng)); }

void Chain::refresh_caches() {
    ssr_ = ssr_from(a_, basis_for(n_), resid_);
    if (spec_.shape == ShapeKind::Monotone) {
        log_prior_ = isotonic_prior_logdensity(BernsteinPoly(a_, spec_.tau), spec_);
    } else {
        log_prior_ = 0.0;
        auto it = spec_.shape == ShapeKind::UnimodalConcave
                      ? std::max_element(a_.begin(), a_.end())
                      : std::min_element(a_.begin(), a_.end());
        peak_ = static_cast<int>(it - a_.begin());
    }
    steps_since_refresh_ = 0;
}

void Chain::maybe_refresh() {
    if (++steps_since_refresh_ >= kRefreshStride) refresh_caches();
}

bool Chain::accept(double log_ratio, Rng& rng) {
    if (log_ratio >= 0.0) return true;
    if (log_ratio == kNegInf) return false;
    return std::log(rng.uniform()) < log_ratio;
}

void Chain::record_proposal(std::span<const double> coeffs, int peak) {
    if (!cfg_.record_proposals) return;
    last_proposal_ =
        PriorDraw{BernsteinPoly(std::vector<double>(coeffs.begin(), coeffs.end()), spec_.tau), peak};
}

ChainState Chain::state() const {
    return ChainState{PriorDraw{BernsteinPoly(a_, spec_.tau), peak_}, log_lik(), log_prior_};
}

StepInfo Chain::step_ima(Rng& rng) {
    StepInfo info{MoveKind::Ima, false, 0.0};
    const PriorDraw prop = sample_prior(spec_, rng);
    const auto& pc = prop.poly.coeffs();
    const double new_ssr = ssr_from(pc, basis_for(prop.poly.order()), prop_resid_);
    info.log_ratio = log_lik_from_ssr(new_ssr) - log_lik_from_ssr(ssr_);
    record_proposal(pc, prop.peak_index);
    if (accept(info.log_ratio, rng)) {
        info.accepted = true;
        a_ = pc;
        n_ = prop.poly.order();
        resid_.swap(prop_resid_);
        ssr_ = new_ssr;
        if (spec_.shape == ShapeKind::Monotone) {
            log_prior_ = isotonic_prior_logdensity(prop.poly, spec_);
        } else {
            peak_ = prop.peak_index;
        }
    }
    return info;
}

StepInfo Chain::step_h(Rng& rng) {
    StepInfo info{MoveKind::H, false, 0.0};
    const int n = n_;
    int k;
    if (n == 1) {
        // The interior-index rule is undefined at n = 1; split evenly between
        // the two endpoints.
        k = rng.uniform() < 0.5 ? 0 : 1;
    } else {
        const double u = rng.uniform();
        if (u < 1.0 / 3.0) {
            k = 0;
        } else if (u < 2.0 / 3.0) {
            k = n;
        } else {
            k = static_cast<int>(rng.uniform_int(1, n - 1));
        }
    }
    const double lo = k == 0 ? cfg_.m1 : a_[k - 1];
    const double hi = k == n ? cfg_.m2 : a_[k + 1];
    if (!(hi > lo)) {
        info.log_ratio = kNan;
        return info;
    }
    const double v = rng.uniform(lo, hi);

    double dlp = 0.0;
    if (k == 0) {
        dlp = spec_.q1.contains(v)
                  ? (n - 1) * (std::log(a_[n] - a_[0]) - std::log(a_[n] - v))
                  : kNegInf;
    } else if (k == n) {
        dlp = spec_.q2.contains(v)
                  ? (n - 1) * (std::log(a_[n] - a_[0]) - std::log(v - a_[0]))
                  : kNegInf;
    }

    const std::size_t m = obs_x_.size();
    const double* col = basis_for(n).data() + static_cast<std::size_t>(k) * m;
    const double delta = v - a_[k];
    double dssr = 0.0;
    for (std::size_t o = 0; o < m; ++o) {
        const double e = delta * col[o];
        dssr += e * (e - 2.0 * resid_[o]);
    }
    info.log_ratio = (cfg_.flat_likelihood ? 0.0 : -dssr / (2.0 * sigma_sq_)) + dlp;

    if (cfg_.record_proposals) {
        prop_a_ = a_;
        prop_a_[k] = v;
        record_proposal(prop_a_, peak_);
    }
    if (accept(info.log_ratio, rng)) {
        info.accepted = true;
        a_[k] = v;
        for (std::size_t o = 0; o < m; ++o) resid_[o] -= delta * col[o];
        ssr_ += dssr;
        log_prior_ += dlp;
    }
    return info;
}

StepInfo Chain::step_birth(Rng& rng) {
    StepInfo info{MoveKind::HPlus, false, 0.0};
    const int n = n_;
    if (n >= spec_.order_dist.max_order()) {
        info.log_ratio = kNan;
        return info;
    }
    const double v = rng.uniform(a_[0], a_[n]);
    const auto pos = std::upper_bound(a_.begin(), a_.end(), v);
    prop_a_.clear();
    prop_a_.reserve(a_.size() + 1);
    prop_a_.insert(prop_a_.end(), a_.begin(), pos);
    prop_a_.push_back(v);
    prop_a_.insert(prop_a_.end(), pos, a_.end());

    const double new_ssr = ssr_from(prop_a_, basis_for(n + 1), prop_resid_);
    info.log_ratio = log_lik_from_ssr(new_ssr) - log_lik_from_ssr(ssr_);
    if (cfg_.strict_balance) {
        const auto fwd = move_probabilities(n, cfg_.c, spec_.order_dist);
        const auto rev = move_probabilities(n + 1, cfg_.c, spec_.order_dist);
        info.log_ratio += std::log(spec_.order_dist.pmf(n + 1) * rev.down) -
                          std::log(spec_.order_dist.pmf(n) * fwd.up);
    }
    record_proposal(prop_a_, peak_);
    if (accept(info.log_ratio, rng)) {
        info.accepted = true;
        log_prior_ += std::log(spec_.order_dist.pmf(n + 1)) - std::log(spec_.order_dist.pmf(n)) +
                      std::log(static_cast<double>(n)) - std::log(a_[n] - a_[0]);
        a_.swap(prop_a_);
        resid_.swap(prop_resid_);
        ssr_ = new_ssr;
        n_ = n + 1;
    }
    return info;
}

StepInfo Chain::step_death(Rng& rng) {
    StepInfo info{MoveKind::HMinus, false, 0.0};
    const int n = n_;
    if (n <= spec_.order_dist.min_order()) {
        info.log_ratio = kNan;
        return info;
    }
    const int k = static_cast<int>(rng.uniform_int(1, n - 1));
    prop_a_.clear();
    prop_a_.reserve(a_.size() - 1);
    prop_a_.insert(prop_a_.end(), a_.begin(), a_.begin() + k);
    prop_a_.insert(prop_a_.end(), a_.begin() + k + 1, a_.end());

    const double new_ssr = ssr_from(prop_a_, basis_for(n - 1), prop_resid_);
    info.log_ratio = log_lik_from_ssr(new_ssr) - log_lik_from_ssr(ssr_);
    if (cfg_.strict_balance) {
        const auto fwd = move_probabilities(n, cfg_.c, spec_.order_dist);
        const auto rev = move_probabilities(n - 1, cfg_.c, spec_.order_dist);
        info.log_ratio += std::log(spec_.order_dist.pmf(n - 1) * rev.up) -
                          std::log(spec_.order_dist.pmf(n) * fwd.down);
    }
    record_proposal(prop_a_, peak_);
    if (accept(info.log_ratio, rng)) {
        info.accepted = true;
        log_prior_ += std::log(spec_.order_dist.pmf(n - 1)) - std::log(spec_.order_dist.pmf(n)) +
                      std::log(a_[n] - a_[0]) - std::log(static_cast<double>(n - 1));
        a_.swap(prop_a_);
        resid_.swap(prop_resid_);
        ssr_ = new_ssr;
        n_ = n - 1;
    }
    return info;
}

StepInfo Chain::step_within_order(Rng& rng) {
    StepInfo info{MoveKind::H, false, 0.0};
    const int n = n_;
    const int k = static_cast<int>(rng.uniform_int(0, n));
    const Interval window = shape_feasible_interval(a_, k, spec_);
    if (!(window.hi > window.lo)) {
        info.log_ratio = kNan;
        return info;
    }
    const double v = rng.uniform(window.lo, window.hi);

    prop_a_ = a_;
    prop_a_[k] = v;
    const Interval back = shape_feasible_interval(prop_a_, k, spec_);
    if (!(back.hi > back.lo)) {
        info.log_ratio = kNan;
        return info;
    }

    const std::size_t m = obs_x_.size();
    const double* col = basis_for(n).data() + static_cast<std::size_t>(k) * m;
    const double delta = v - a_[k];
    double dssr = 0.0;
    for (std::size_t o = 0; o < m; ++o) {
        const double e = delta * col[o];
        dssr += e * (e - 2.0 * resid_[o]);
    }
    info.log_ratio = (cfg_.flat_likelihood ? 0.0 : -dssr / (2.0 * sigma_sq_)) +
                     std::log(window.width()) - std::log(back.width());
    record_proposal(prop_a_, peak_);
    if (accept(info.log_ratio, rng)) {
        info.accepted = true;
        a_[k] = v;
        for (std::size_t o = 0; o < m; ++o) resid_[o] -= delta * col[o];
        ssr_ += dssr;
        auto it = spec_.shape == ShapeKind::UnimodalConcave
                      ? std::max_element(a_.begin(), a_.end())
                      : std::min_element(a_.begin(), a_.end());
        peak_ = static_cast<int>(it - a_.begin());
    }
    return info;
}

StepInfo Chain::step_order_jump(Rng& rng, int direction) {
    StepInfo info{direction > 0 ? MoveKind::HPlus : MoveKind::HMinus, false, 0.0};
    const int n = n_;
    const int n2 = n + direction;
    if (n2 < spec_.order_dist.min_order() || n2 > spec_.order_dist.max_order()) {
        info.log_ratio = kNan;
        return info;
    }
    const PriorDraw prop = sample_prior_given_order(spec_, n2, rng);
    const auto& pc = prop.poly.coeffs();
    const double new_ssr = ssr_from(pc, basis_for(n2), prop_resid_);
    info.log_ratio = log_lik_from_ssr(new_ssr) - log_lik_from_ssr(ssr_);
    if (cfg_.strict_balance) {
        const auto fwd = move_probabilities(n, cfg_.c, spec_.order_dist);
        const auto rev = move_probabilities(n2, cfg_.c, spec_.order_dist);
        const double fwd_sel = direction > 0 ? fwd.up : fwd.down;
        const double rev_sel = direction > 0 ? rev.down : rev.up;
        info.log_ratio += std::log(spec_.order_dist.pmf(n2) * rev_sel) -
                          std::log(spec_.order_dist.pmf(n) * fwd_sel);
    }
    record_proposal(pc, prop.peak_index);
    if (accept(info.log_ratio, rng)) {
        info.accepted = true;
        a_ = pc;
        n_ = n2;
        peak_ = prop.peak_index;
        resid_.swap(prop_resid_);
        ssr_ = new_ssr;
    }
    return info;
}

StepInfo Chain::step(Rng& rng) {
    maybe_refresh();
    if (cfg_.kind == SamplerConfig::Kind::Ima) return step_ima(rng);
    const auto mp = move_probabilities(n_, cfg_.c, spec_.order_dist);
    const double u = rng.uniform();
    const bool monotone = spec_.shape == ShapeKind::Monotone;
    if (u < mp.up) return monotone ? step_birth(rng) : step_order_jump(rng, +1);
    if (u < mp.up + mp.down) return monotone ? step_death(rng) : step_order_jump(rng, -1);
    return monotone ? step_h(rng) : step_within_order(rng);
}

namespace {

SamplerConfig single_step_config(const SamplerConfig& base) {
    SamplerConfig cfg = base;
    cfg.updates = 1;
    cfg.burn_in = 0;
    return cfg;
}

}  // namespace

ChainState ima_step(const ChainState& state, const Dataset& d, const PriorSpec& spec,
                    double sigma_sq, Rng& rng) {
    SamplerConfig cfg;
    cfg.kind = SamplerConfig::Kind::Ima;
    cfg.updates = 1;
    cfg.burn_in = 0;
    Chain chain(d, spec, cfg, sigma_sq);
    chain.init(state.draw);
    chain.step_ima(rng);
    return chain.state();
}

ChainState mhra_h_move(const ChainState& state, const Dataset& d, const SamplerConfig& cfg,
                       const PriorSpec& spec, double sigma_sq, Rng& rng) {
    Chain chain(d, spec, single_step_config(cfg), sigma_sq);
    chain.init(state.draw);
    chain.step_h(rng);
    return chain.state();
}

ChainState mhra_birth_move(const ChainState& state, const Dataset& d, const SamplerConfig& cfg,
                           const PriorSpec& spec, double sigma_sq, Rng& rng) {
    Chain chain(d, spec, single_step_config(cfg), sigma_sq);
    chain.init(state.draw);
    chain.step_birth(rng);
    return chain.state();
}

ChainState mhra_death_move(const ChainState& state, const Dataset& d, const SamplerConfig& cfg,
                           const PriorSpec& spec, double sigma_sq, Rng& rng) {
    Chain chain(d, spec, single_step_config(cfg), sigma_sq);
    chain.init(state.draw);
    chain.step_death(rng);
    return chain.state();
}

ChainState convex_posterior_step(const ChainState& state, const Dataset& d, const PriorSpec& spec,
                                 const SamplerConfig& cfg, double sigma_sq, Rng& rng) {
    if (spec.shape != ShapeKind::UnimodalConcave && spec.shape != ShapeKind::UnimodalConvex)
        throw ConfigError("convex_posterior_step needs a concave or convex spec");
    Chain chain(d, spec, single_step_config(cfg), sigma_sq);
    chain.init(state.draw);
    chain.step(rng);
    return chain.state();
}

ChainTrace run_chain(const Dataset& d, const PriorSpec& spec, const SamplerConfig& cfg,
                     double sigma_sq, const std::optional<PriorDraw>& init) {
    cfg.validate();
    Rng rng(cfg.seed);
    Chain chain(d, spec, cfg, sigma_sq);
    if (init) {
        chain.init(*init);
    } else {
        chain.init_from_prior(rng);
    }

    ChainTrace trace;
    trace.tau = d.tau;
    const std::size_t n_states =
        static_cast<std::size_t>((cfg.updates - cfg.burn_in + cfg.thinning - 1) / cfg.thinning);
    trace.orders.reserve(n_states);
    trace.offsets.reserve(n_states + 1);
    trace.offsets.push_back(0);
    trace.coeff_data.reserve(n_states * (spec.order_dist.max_order() / 2 + 2));

    for (std::int64_t t = 1; t <= cfg.updates; ++t) {
        const StepInfo si = chain.step(rng);
        auto& tally = trace.tallies[static_cast<int>(si.kind)];
        ++tally.proposed;
        if (si.accepted) ++tally.accepted;
        if (t > cfg.burn_in && (t - cfg.burn_in - 1) % cfg.thinning == 0)
            trace.append(chain.order(), chain.coeffs());
    }
    return trace;
}

std::string trace_to_json(const ChainTrace& trace, const std::string& states_file) {
    nlohmann::json j;
    j["orders"] = trace.orders;
    nlohmann::json acc;
    for (int k = 0; k < 4; ++k) {
        acc[move_name(static_cast<MoveKind>(k))] = {
            {"proposed", trace.tallies[k].proposed},
            {"accepted", trace.tallies[k].accepted},
        };
    }
    j["acceptance"] = acc;
    if (!states_file.empty()) j["states_file"] = states_file;
    return j.dump();
}

ChainTrace trace_from_json(const std::string& json_text, std::istream* states, double tau) {
    const auto j = nlohmann::json::parse(json_text);
    ChainTrace trace;
    trace.tau = tau;
    if (states != nullptr) {
        trace = read_trace_binary(*states, tau);
    } else {
        trace.orders = j.at("orders").get<std::vector<int>>();
        trace.offsets.clear();
    }
    const auto orders = j.at("orders").get<std::vector<int>>();
    if (orders != trace.orders) throw IoError("trace JSON and state dump disagree on orders");
    const auto& acc = j.at("acceptance");
    for (int k = 0; k < 4; ++k) {
        const auto& m = acc.at(move_name(static_cast<MoveKind>(k)));
        trace.tallies[k].proposed = m.at("proposed").get<std::int64_t>();
        trace.tallies[k].accepted = m.at("accepted").get<std::int64_t>();
    }
    return trace;
}

void write_trace_binary(const ChainTrace& trace, std::ostream& out) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const std::uint32_t n = static_cast<std::uint32_t>(trace.orders[i]);
        out.write(reinterpret_cast<const char*>(&n), sizeof n);
        const auto c = trace.state_coeffs(i);
        out.write(reinterpret_cast<const char*>(c.data()),
                  static_cast<std::streamsize>(c.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed to write trace state dump");
}

ChainTrace read_trace_binary(std::istream& in, double tau) {
    ChainTrace trace;
    trace.tau = tau;
    trace.offsets.push_back(0);
    std::uint32_t n = 0;
    std::vector<double> buf;
    while (in.read(reinterpret_cast<char*>(&n), sizeof n)) {
        buf.resize(n + 1);
        if (!in.read(reinterpret_cast<char*>(buf.data()),
                     static_cast<std::streamsize>(buf.size() * sizeof(double))))
            throw IoError("truncated trace state dump");
        trace.append(static_cast<int>(n), buf);
    }
    return trace;
}

}  // namespace bsr
