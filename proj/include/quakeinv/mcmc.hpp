#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quakeinv/rng.hpp"
#include "quakeinv/wavesim.hpp"

namespace quakeinv::mcmc {

/// Sampler knobs: chain count M, the resampling rule, and the diagonal
/// proposal covariance (as per-parameter standard deviations).
struct SamplerConfig {
    int n_chains = 1;
    long total_steps = 0;
    bool resample_enabled = true;
    long resample_period = 0;            // every N steps when > 0
    std::vector<long> resample_steps;    // explicit schedule; overrides the period
    long burn_in = 0;                    // steps discarded after the last resample
    std::vector<double> proposal_stds;   // one per parameter
    std::uint64_t seed = 0;
    int workers = 0;                     // 0 = one per chain

    /// Resolved resampling steps within (0, total_steps), ascending.
    std::vector<long> schedule() const;
    void validate(int dim) const;
};

/// One draw of one chain: the retained state after an MH decision, its
/// density bookkeeping, and the attached forward outputs.
struct SampleRecord {
    int chain = 0;
    long step = 0;
    std::vector<double> params;
    double log_prior = 0.0;
    double log_lik = 0.0;
    double log_post = 0.0;  // log_prior + log_lik, unnormalized
    wavesim::ForwardOutput forward;
    bool accepted = false;
};

/// The posterior density pieces the sampler composes. `forward` may throw;
/// any DomainError/NumericError from it is treated as zero likelihood.
struct PosteriorModel {
    std::function<double(const std::vector<double>&)> log_prior;
    std::function<wavesim::ForwardOutput(const std::vector<double>&)> forward;
    std::function<double(const wavesim::ForwardOutput&)> log_lik;
};

struct ChainState {
    int id = 0;
    SampleRecord current;
    RngStream rng;
    long proposed = 0;
    long accepted = 0;
    long forward_failures = 0;
};

/// The MH accept primitive: draws one uniform from `rng` and returns whether
/// to move given the unnormalized log posterior of the proposal and of the
/// current state.
bool mh_accept(RngStream& rng, double log_post_proposed, double log_post_current);

/// One random-walk Metropolis step. Proposals outside the prior support are
/// rejected without running the forward model. Each step consumes exactly
/// dim normal draws plus one uniform from the chain's stream.
SampleRecord mh_step(ChainState& state, const SamplerConfig& cfg, const PosteriorModel& model);

/// Normalized resampling weights from unnormalized log posteriors
/// (exp-shifted by the max). Throws NumericError when every weight is zero.
std::vector<double> resample_weights(const std::vector<double>& log_posts);

/// Redraws every chain's current record, with replacement, from the current
/// records weighted by posterior density. Chain rng streams stay put.
void resample_chains(std::vector<ChainState>& states, RngStream& master);

/// Everything run_sampler produced: all records (ordered by step, then
/// chain) plus the labels needed to interpret them.
struct SampleStore {
    std::vector<std::string> param_names;
    std::vector<std::string> gauge_names;
    std::vector<SampleRecord> records;
    long posterior_start = 0;  // first step of the posterior set
    std::vector<long> resample_steps;

    std::vector<const SampleRecord*> posterior_set() const;
};

/// Runs M chains for total_steps with resampling barriers, persisting
/// incrementally when `persist_dir` is non-empty (samples.csv +
/// checkpoint.txt). Initial states must have positive posterior density.
SampleStore run_sampler(const SamplerConfig& cfg, const PosteriorModel& model,
                        const std::vector<std::vector<double>>& initial_params,
                        const std::vector<std::string>& param_names,
                        const std::vector<std::string>& gauge_names,
                        const std::string& persist_dir = "");

/// Continues an interrupted run from persist_dir's checkpoint.
SampleStore resume_sampler(const SamplerConfig& cfg, const PosteriorModel& model,
                           const std::string& persist_dir);

void write_samples_csv(const std::string& path, const SampleStore& store);
SampleStore read_samples_csv(const std::string& path, const SamplerConfig& cfg);

/// Rolling cross-chain statistics, acceptance rates, posterior-set summary,
/// and the argmax records.
struct Diagnostics {
    struct Rolling {
        std::vector<long> steps;
        std::vector<double> mean, std;
    };
    std::vector<Rolling> rolling;            // per parameter, window 100
    std::vector<double> acceptance_rate;     // per chain
    std::vector<long> accepted, proposed;    // per chain
    struct Summary {
        double mean, std, q05, q25, q50, q75, q95;
    };
    std::vector<Summary> posterior;          // per parameter
    SampleRecord map_record;                 // argmax log_post over the posterior set
    SampleRecord mle_record;                 // argmax log_lik over the posterior set
};

Diagnostics diagnostics(const SampleStore& store, int window = 100);

}  // namespace quakeinv::mcmc
