#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsr/model.hpp"
#include "bsr/priors.hpp"
#include "bsr/rng.hpp"

namespace bsr {

enum class MoveKind : int { H = 0, HPlus = 1, HMinus = 2, Ima = 3 };

struct MoveProbabilities {
    double h = 1.0;
    double up = 0.0;
    double down = 0.0;
};

/// Selection probabilities for the three move types at order n:
///   up = c min{1, p(n+1)/p(n)}, down = c min{1, p(n-1)/p(n)}, h = 1 - up - down,
/// with up = 0 at the support cap and down = 0 at the support floor.
MoveProbabilities move_probabilities(int n, double c, const OrderDistribution& dist);

struct SamplerConfig {
    enum class Kind { Ima, Mhra };
    Kind kind = Kind::Mhra;
    double c = 0.35;  // order-move selection scale, in [0, 1/2]
    double m1 = 0.0;  // global lower bound for endpoint H-move windows
    double m2 = 1.0;  // global upper bound
    std::int64_t updates = 100000;
    std::int64_t burn_in = 10000;
    std::int64_t thinning = 1;
    std::uint64_t seed = 0;
    bool flat_likelihood = false;   // replaces the likelihood with 1 (prior-recovery tests)
    bool strict_balance = false;    // multiply the selection-probability ratio into order moves
    bool record_proposals = false;  // keep the last proposal visible (test hook)

    void validate() const;
};

struct MoveTally {
    std::int64_t proposed = 0;
    std::int64_t accepted = 0;
};

/// Post-burn-in retained states in compact form, plus per-move tallies.
struct ChainTrace {
    double tau = 1.0;
    std::vector<int> orders;             // order history of the retained states
    std::vector<std::size_t> offsets;    // coeff_data slice boundaries, size orders.size()+1
    std::vector<double> coeff_data;
    std::array<MoveTally, 4> tallies{};  // indexed by MoveKind

    std::size_t size() const { return orders.size(); }
    std::span<const double> state_coeffs(std::size_t i) const;
    BernsteinPoly state(std::size_t i) const;
    const std::vector<int>& order_history() const { return orders; }
    double acceptance_rate() const;
    void append(int order, std::span<const double> coeffs);
};

/// Current sampler position with cached log densities.
struct ChainState {
    PriorDraw draw;
    double log_lik = 0.0;
    double log_prior = 0.0;  // 0 for shapes without a closed-form prior density
};

/// Builds a state with caches computed from scratch.
ChainState make_chain_state(PriorDraw draw, const Dataset& d, const PriorSpec& spec,
                            double sigma_sq, bool flat_likelihood = false);

struct StepInfo {
    MoveKind kind = MoveKind::H;
    bool accepted = false;
    double log_ratio = 0.0;  // NaN for degenerate no-op proposals
};

/// One-coordinate feasibility window used by the concave/convex within-order
/// move: the exact set of values for coefficient k keeping the state inside
/// the shape constraints, the beta endpoint bounds and the q box on the peak.
Interval shape_feasible_interval(std::span<const double> coeffs, int k, const PriorSpec& spec);

/// Full-state feasibility for concave/convex chains (shape + beta + q box).
bool shape_state_feasible(std::span<const double> coeffs, const PriorSpec& spec);

/// Markov chain engine. Keeps per-observation residual caches so H moves cost
/// O(K) and order moves O(K n). The public step_* entry points drive a single
/// move; step() dispatches according to the config and shape class.
class Chain {
public:
    Chain(const Dataset& d, const PriorSpec& spec, const SamplerConfig& cfg, double sigma_sq);

    void init(const PriorDraw& draw);
    void init_from_prior(Rng& rng);

    StepInfo step(Rng& rng);

    StepInfo step_ima(Rng& rng);
    StepInfo step_h(Rng& rng);
    StepInfo step_birth(Rng& rng);
    StepInfo step_death(Rng& rng);
    StepInfo step_within_order(Rng& rng);
    StepInfo step_order_jump(Rng& rng, int direction);

    int order() const { return n_; }
    const std::vector<double>& coeffs() const { return a_; }
    double log_lik() const;
    double log_prior() const { return log_prior_; }
    ChainState state() const;
    const std::optional<PriorDraw>& last_proposal() const { return last_proposal_; }

    /// Recomputes residuals, SSR and the prior cache from the coefficients.
    void refresh_caches();

private:
    const std::vector<double>& basis_for(int n);
    double log_lik_from_ssr(double ssr) const;
    bool accept(double log_ratio, Rng& rng);
    void record_proposal(std::span<const double> coeffs, int peak);
    double ssr_from(std::span<const double> coeffs, const std::vector<double>& basis,
                    std::vector<double>& resid_out) const;
    void maybe_refresh();

    const Dataset* data_;
    PriorSpec spec_;
    SamplerConfig cfg_;
    double sigma_sq_;
    double loglik_norm_ = 0.0;

    std::vector<double> obs_x_, obs_y_;
    std::vector<std::vector<double>> basis_;  // per order, column-major (n+1 columns of size m)

    std::vector<double> a_;
    int n_ = 0;
    int peak_ = -1;
    std::vector<double> resid_;
    double ssr_ = 0.0;
    double log_prior_ = 0.0;
    std::int64_t steps_since_refresh_ = 0;

    std::optional<PriorDraw> last_proposal_;
    std::vector<double> prop_a_, prop_resid_;
};

/// Single independent-Metropolis update: propose from the prior, accept with
/// the likelihood ratio (prior-proposal and prior-target factors cancel).
ChainState ima_step(const ChainState& state, const Dataset& d, const PriorSpec& spec,
                    double sigma_sq, Rng& rng);

/// Single within-order move of the isotonic reversible-jump sampler.
ChainState mhra_h_move(const ChainState& state, const Dataset& d, const SamplerConfig& cfg,
                       const PriorSpec& spec, double sigma_sq, Rng& rng);

/// Single birth move (order n -> n+1).
ChainState mhra_birth_move(const ChainState& state, const Dataset& d, const SamplerConfig& cfg,
                           const PriorSpec& spec, double sigma_sq, Rng& rng);

/// Single death move (order n -> n-1).
ChainState mhra_death_move(const ChainState& state, const Dataset& d, const SamplerConfig& cfg,
                           const PriorSpec& spec, double sigma_sq, Rng& rng);

/// Composite concave/convex posterior step: with probability 1-up-down a
/// constrained within-order move, otherwise an independent order jump.
ChainState convex_posterior_step(const ChainState& state, const Dataset& d, const PriorSpec& spec,
                                 const SamplerConfig& cfg, double sigma_sq, Rng& rng);

/// Runs a full chain: `updates` steps, discards `burn_in`, records every
/// `thinning`-th state. Deterministic given (seed, config, data).
ChainTrace run_chain(const Dataset& d, const PriorSpec& spec, const SamplerConfig& cfg,
                     double sigma_sq, const std::optional<PriorDraw>& init = std::nullopt);

/// JSON trace summary {orders, acceptance, states_file?}; states go to the
/// binary dump (little-endian u32 order then order+1 f64 coefficients each).
std::string trace_to_json(const ChainTrace& trace, const std::string& states_file = "");
ChainTrace trace_from_json(const std::string& json_text, std::istream* states, double tau);
void write_trace_binary(const ChainTrace& trace, std::ostream& out);
ChainTrace read_trace_binary(std::istream& in, double tau);

}  // namespace bsr
