#include "quakeinv/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "quakeinv/errors.hpp"
#include "quakeinv/textio.hpp"

namespace quakeinv::mcmc {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

std::vector<long> SamplerConfig::schedule() const {
    std::vector<long> out;
    if (!resample_enabled) return out;
    if (!resample_steps.empty()) {
        out = resample_steps;
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        std::erase_if(out, [&](long s) { return s <= 0 || s >= total_steps; });
        return out;
    }
    if (resample_period > 0)
        for (long s = resample_period; s < total_steps; s += resample_period) out.push_back(s);
    return out;
}

void SamplerConfig::validate(int dim) const {
    if (n_chains < 1) throw ConfigError("sampler: need at least one chain");
    if (total_steps < 1) throw ConfigError("sampler: total_steps must be positive");
    if (burn_in < 0 || burn_in >= total_steps)
        throw ConfigError("sampler: burn_in must lie in [0, total_steps)");
    if (static_cast<int>(proposal_stds.size()) != dim)
        throw ConfigError("sampler: expected " + std::to_string(dim) + " proposal stds");
    for (double s : proposal_stds)
        if (!(s > 0)) throw ConfigError("sampler: proposal stds must be positive");
}

bool mh_accept(RngStream& rng, double log_post_proposed, double log_post_current) {
    const double u = rng.uniform();
    if (log_post_proposed == neg_inf) return false;
    if (log_post_proposed >= log_post_current) return true;
    return std::log(u + 1e-300) < log_post_proposed - log_post_current;
}

SampleRecord mh_step(ChainState& state, const SamplerConfig& cfg, const PosteriorModel& model) {
    const std::size_t dim = cfg.proposal_stds.size();
    std::vector<double> prop(dim);
    for (std::size_t d = 0; d < dim; ++d)
        prop[d] = state.current.params[d] + cfg.proposal_stds[d] * state.rng.normal();

    SampleRecord proposal;
    proposal.chain = state.id;
    proposal.params = std::move(prop);
    proposal.log_prior = model.log_prior(proposal.params);
    if (proposal.log_prior == neg_inf) {
        // outside prior support: skip the forward model entirely
        proposal.log_lik = neg_inf;
        proposal.log_post = neg_inf;
    } else {
        try {
            proposal.forward = model.forward(proposal.params);
            proposal.log_lik = model.log_lik(proposal.forward);
        } catch (const DomainError&) {
            proposal.log_lik = neg_inf;
            ++state.forward_failures;
        } catch (const NumericError&) {
            proposal.log_lik = neg_inf;
            ++state.forward_failures;
        }
        proposal.log_post = (proposal.log_lik == neg_inf)
                                ? neg_inf
                                : proposal.log_prior + proposal.log_lik;
    }

    const bool accept = mh_accept(state.rng, proposal.log_post, state.current.log_post);
    ++state.proposed;
    if (accept) {
        ++state.accepted;
        state.current = std::move(proposal);
    }
    SampleRecord rec = state.current;
    rec.accepted = accept;
    return rec;
}

std::vector<double> resample_weights(const std::vector<double>& log_posts) {
    double max_lp = neg_inf;
    for (double lp : log_posts) max_lp = std::max(max_lp, lp);
    if (max_lp == neg_inf)
        throw NumericError("resampling impossible: every chain has zero posterior density");
    std::vector<double> w(log_posts.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(log_posts[i] - max_lp);
        sum += w[i];
    }
    for (double& x : w) x /= sum;
    return w;
}

void resample_chains(std::vector<ChainState>& states, RngStream& master) {
    std::vector<double> log_posts(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) log_posts[i] = states[i].current.log_post;
    const std::vector<double> w = resample_weights(log_posts);

    const std::vector<SampleRecord> snapshot = [&] {
        std::vector<SampleRecord> s;
        s.reserve(states.size());
        for (const auto& st : states) s.push_back(st.current);
        return s;
    }();
    for (auto& st : states) {
        const double u = master.uniform();
        double acc = 0.0;
        std::size_t pick = states.size() - 1;
        for (std::size_t j = 0; j < w.size(); ++j) {
            acc += w[j];
            if (u < acc) {
                pick = j;
                break;
            }
        }
        st.current = snapshot[pick];
        st.current.chain = st.id;
    }
}

std::vector<const SampleRecord*> SampleStore::posterior_set() const {
    std::vector<const SampleRecord*> out;
    for (const auto& r : records)
        if (r.step >= posterior_start) out.push_back(&r);
    return out;
}

namespace {

std::string checkpoint_path(const std::string& dir) { return dir + "/checkpoint.txt"; }
std::string samples_path(const std::string& dir) { return dir + "/samples.csv"; }

void write_csv_header(std::ostream& os, const SampleStore& store) {
    os << "chain, step";
    for (const auto& n : store.param_names) os << ", " << n;
    os << ", log_prior, log_lik, log_post, accepted";
    for (const auto& g : store.gauge_names)
        os << ", " << g << "_height, " << g << "_arrival, " << g << "_inundation";
    os << "\n";
}

void write_csv_record(std::ostream& os, const SampleRecord& r) {
    using textio::format_double;
    os << r.chain << ", " << r.step;
    for (double p : r.params) os << ", " << format_double(p);
    os << ", " << format_double(r.log_prior) << ", " << format_double(r.log_lik) << ", "
       << format_double(r.log_post) << ", " << (r.accepted ? 1 : 0);
    for (const auto& g : r.forward.gauges)
        os << ", " << format_double(g.max_height) << ", " << format_double(g.arrival) << ", "
           << format_double(g.inundation);
    os << "\n";
}

void append_records(const std::string& dir, const SampleStore& store, std::size_t from) {
    const std::string path = samples_path(dir);
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError("cannot open " + path + " for append");
    if (fresh) write_csv_header(out, store);
    for (std::size_t i = from; i < store.records.size(); ++i)
        write_csv_record(out, store.records[i]);
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

void save_checkpoint(const std::string& dir, const SamplerConfig& cfg,
                     const std::vector<ChainState>& states, const RngStream& master,
                     long next_step, std::size_t rows_written) {
    const std::string tmp = checkpoint_path(dir) + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw IoError("cannot write " + tmp);
        out.precision(17);
        out << "quakeinv-checkpoint 1\n";
        out << "next_step " << next_step << "\n";
        out << "rows_written " << rows_written << "\n";
        out << "chains " << states.size() << "\n";
        out << "master_rng ";
        master.save(out);
        out << "\n";
        for (const auto& st : states) {
            out << "chain " << st.id << ' ' << st.proposed << ' ' << st.accepted << ' '
                << st.forward_failures << "\n";
            out << "params";
            for (double p : st.current.params) out << ' ' << textio::format_double(p);
            out << "\n";
            out << "density " << textio::format_double(st.current.log_prior) << ' '
                << textio::format_double(st.current.log_lik) << ' '
                << textio::format_double(st.current.log_post) << ' '
                << (st.current.accepted ? 1 : 0) << ' ' << st.current.step << "\n";
            out << "forward " << st.current.forward.gauges.size();
            for (const auto& g : st.current.forward.gauges)
                out << ' ' << textio::format_double(g.max_height) << ' '
                    << textio::format_double(g.arrival) << ' '
                    << textio::format_double(g.inundation);
            out << "\n";
            out << "rng ";
            st.rng.save(out);
            out << "\n";
        }
        if (!out) throw IoError("write failed for " + tmp);
        (void)cfg;
    }
    std::filesystem::rename(tmp, checkpoint_path(dir));
}

struct CheckpointData {
    long next_step = 0;
    std::size_t rows_written = 0;
    std::vector<ChainState> states;
    RngStream master;
};

CheckpointData load_checkpoint(const std::string& dir) {
    std::ifstream in(checkpoint_path(dir));
    if (!in) throw IoError("cannot open " + checkpoint_path(dir));
    CheckpointData ck;
    std::string tag;
    int version = 0;
    in >> tag >> version;
    if (tag != "quakeinv-checkpoint" || version != 1)
        throw ConfigError(checkpoint_path(dir) + ": unrecognized checkpoint format");
    std::size_t n_chains = 0;
    in >> tag >> ck.next_step >> tag >> ck.rows_written >> tag >> n_chains >> tag;
    ck.master.load(in);
    ck.states.resize(n_chains);
    for (auto& st : ck.states) {
        in >> tag >> st.id >> st.proposed >> st.accepted >> st.forward_failures;
        if (tag != "chain") throw ConfigError("checkpoint: expected chain block");
        in >> tag;  // "params"
        std::string line;
        std::getline(in, line);
        std::istringstream ps(line);
        double v;
        while (ps >> v) st.current.params.push_back(v);
        int acc = 0;
        in >> tag >> st.current.log_prior >> st.current.log_lik >> st.current.log_post >>
            acc >> st.current.step;
        st.current.accepted = acc != 0;
        std::size_t ng = 0;
        in >> tag >> ng;
        st.current.forward.gauges.resize(ng);
        for (auto& g : st.current.forward.gauges)
            in >> g.max_height >> g.arrival >> g.inundation;
        in >> tag;  // "rng"
        st.rng.load(in);
        st.current.chain = st.id;
    }
    if (!in) throw ConfigError(checkpoint_path(dir) + ": truncated checkpoint");
    return ck;
}

long posterior_start_for(const SamplerConfig& cfg) {
    const auto sched = cfg.schedule();
    const long last = sched.empty() ? 0 : sched.back();
    return last + cfg.burn_in + 1;
}

// Advances chains [first, last) through steps (k0, k1]; records land in
// per-chain slots so threads never share state.
void run_block(std::vector<ChainState>& states, std::vector<std::vector<SampleRecord>>& recs,
               const SamplerConfig& cfg, const PosteriorModel& model, long k0, long k1,
               int first, int last) {
    for (int c = first; c < last; ++c) {
        auto& chain = states[c];
        auto& out = recs[c];
        out.clear();
        out.reserve(k1 - k0);
        for (long k = k0 + 1; k <= k1; ++k) {
            SampleRecord rec = mh_step(chain, cfg, model);
            rec.step = k;
            chain.current.step = k;
            out.push_back(std::move(rec));
        }
    }
}

SampleStore drive_sampler(const SamplerConfig& cfg, const PosteriorModel& model,
                          std::vector<ChainState> states, RngStream master, long start_step,
                          SampleStore store, std::size_t persisted_rows,
                          const std::string& persist_dir) {
    const int M = cfg.n_chains;
    const int workers = std::max(1, cfg.workers > 0 ? std::min(cfg.workers, M) : M);
    std::vector<long> barriers = cfg.schedule();
    barriers.push_back(cfg.total_steps);

    std::vector<std::vector<SampleRecord>> recs(M);
    long k = start_step;
    for (long barrier : barriers) {
        if (barrier <= k) {
            continue;
        }
        if (workers == 1) {
            run_block(states, recs, cfg, model, k, barrier, 0, M);
        } else {
            std::vector<std::thread> pool;
            const int per = (M + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const int first = w * per, last = std::min(M, first + per);
                if (first >= last) break;
                pool.emplace_back(run_block, std::ref(states), std::ref(recs), std::cref(cfg),
                                  std::cref(model), k, barrier, first, last);
            }
            for (auto& t : pool) t.join();
        }
        // merge in (step, chain) order
        for (long s = k + 1; s <= barrier; ++s)
            for (int c = 0; c < M; ++c) store.records.push_back(recs[c][s - k - 1]);
        k = barrier;

        const bool is_resample = std::find(store.resample_steps.begin(),
                                           store.resample_steps.end(), k) !=
                                 store.resample_steps.end();
        if (is_resample) resample_chains(states, master);

        if (!persist_dir.empty()) {
            append_records(persist_dir, store, persisted_rows);
            persisted_rows = store.records.size();
            save_checkpoint(persist_dir, cfg, states, master, k + 1, persisted_rows);
        }
    }

    for (const auto& st : states)
        if (st.forward_failures > 0)
            std::cerr << "[mcmc] chain " << st.id << ": " << st.forward_failures
                      << " forward-model failures treated as zero likelihood\n";
    return store;
}

}  // namespace

SampleStore run_sampler(const SamplerConfig& cfg, const PosteriorModel& model,
                        const std::vector<std::vector<double>>& initial_params,
                        const std::vector<std::string>& param_names,
                        const std::vector<std::string>& gauge_names,
                        const std::string& persist_dir) {
    cfg.validate(static_cast<int>(param_names.size()));
    if (static_cast<int>(initial_params.size()) != cfg.n_chains)
        throw ConfigError("sampler: need one initial parameter vector per chain");

    SampleStore store;
    store.param_names = param_names;
    store.gauge_names = gauge_names;
    store.resample_steps = cfg.schedule();
    store.posterior_start = posterior_start_for(cfg);

    std::vector<ChainState> states(cfg.n_chains);
    for (int c = 0; c < cfg.n_chains; ++c) {
        auto& st = states[c];
        st.id = c;
        st.rng = RngStream::for_chain(cfg.seed, static_cast<std::uint64_t>(c));
        st.current.chain = c;
        st.current.step = 0;
        st.current.params = initial_params[c];
        if (st.current.params.size() != param_names.size())
            throw ConfigError("sampler: initial params for chain " + std::to_string(c) +
                              " have the wrong dimension");
        st.current.log_prior = model.log_prior(st.current.params);
        if (st.current.log_prior == neg_inf)
            throw ConfigError("chain " + std::to_string(c) +
                              ": initial parameters have zero prior density");
        try {
            st.current.forward = model.forward(st.current.params);
            st.current.log_lik = model.log_lik(st.current.forward);
        } catch (const std::runtime_error& e) {
            throw ConfigError("chain " + std::to_string(c) +
                              ": forward model failed at the initial parameters: " + e.what());
        }
        if (st.current.log_lik == neg_inf)
            throw ConfigError("chain " + std::to_string(c) +
                              ": initial parameters have zero likelihood");
        st.current.log_post = st.current.log_prior + st.current.log_lik;
        st.current.accepted = true;
        store.records.push_back(st.current);
    }
    RngStream master = RngStream::for_chain(cfg.seed, 0x100000000ULL);

    std::size_t persisted = 0;
    if (!persist_dir.empty()) {
        std::filesystem::create_directories(persist_dir);
        std::error_code ec;
        std::filesystem::remove(samples_path(persist_dir), ec);
        append_records(persist_dir, store, 0);
        persisted = store.records.size();
        save_checkpoint(persist_dir, cfg, states, master, 1, persisted);
    }
    return drive_sampler(cfg, model, std::move(states), std::move(master), 0, std::move(store),
                         persisted, persist_dir);
}

SampleStore resume_sampler(const SamplerConfig& cfg, const PosteriorModel& model,
                           const std::string& persist_dir) {
    CheckpointData ck = load_checkpoint(persist_dir);
    if (static_cast<int>(ck.states.size()) != cfg.n_chains)
        throw ConfigError("checkpoint has " + std::to_string(ck.states.size()) +
                          " chains but the configuration expects " +
                          std::to_string(cfg.n_chains));
    SampleStore store = read_samples_csv(samples_path(persist_dir), cfg);
    cfg.validate(static_cast<int>(store.param_names.size()));
    if (store.records.size() != ck.rows_written)
        throw ConfigError("samples.csv row count does not match the checkpoint");
    return drive_sampler(cfg, model, std::move(ck.states), std::move(ck.master),
                         ck.next_step - 1, std::move(store), ck.rows_written, persist_dir);
}

void write_samples_csv(const std::string& path, const SampleStore& store) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    write_csv_header(out, store);
    for (const auto& r : store.records) write_csv_record(out, r);
    if (!out) throw IoError("write failed for " + path);
}

SampleStore read_samples_csv(const std::string& path, const SamplerConfig& cfg) {
    const auto lines = textio::read_lines(path);
    if (lines.empty()) throw ConfigError(path + ": empty sample store");
    const auto header = textio::split_fields(lines[0]);
    if (header.size() < 7 || header[0] != "chain" || header[1] != "step")
        throw ConfigError(path + ": unrecognized sample store header");

    SampleStore store;
    std::size_t col = 2;
    while (col < header.size() && header[col] != "log_prior")
        store.param_names.push_back(header[col++]);
    if (col + 4 > header.size()) throw ConfigError(path + ": header is missing density columns");
    col += 4;  // log_prior, log_lik, log_post, accepted
    for (; col + 3 <= header.size(); col += 3) {
        const std::string& h = header[col];
        const auto pos = h.rfind("_height");
        if (pos == std::string::npos || pos + 7 != h.size())
            throw ConfigError(path + ": expected <gauge>_height column, got " + h);
        store.gauge_names.push_back(h.substr(0, pos));
    }

    const std::size_t expect = 6 + store.param_names.size() + 3 * store.gauge_names.size();
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (textio::trim(lines[ln]).empty()) continue;
        const std::string ctx = path + ":" + std::to_string(ln + 1);
        const auto f = textio::split_fields(lines[ln]);
        if (f.size() != expect)
            throw ConfigError(ctx + ": expected " + std::to_string(expect) + " columns");
        SampleRecord r;
        std::size_t c = 0;
        r.chain = static_cast<int>(textio::parse_long(f[c++], ctx));
        r.step = textio::parse_long(f[c++], ctx);
        r.params.resize(store.param_names.size());
        for (auto& p : r.params) p = textio::parse_double(f[c++], ctx);
        r.log_prior = textio::parse_double(f[c++], ctx);
        r.log_lik = textio::parse_double(f[c++], ctx);
        r.log_post = textio::parse_double(f[c++], ctx);
        r.accepted = textio::parse_long(f[c++], ctx) != 0;
        r.forward.gauges.resize(store.gauge_names.size());
        for (auto& g : r.forward.gauges) {
            g.max_height = textio::parse_double(f[c++], ctx);
            g.arrival = textio::parse_double(f[c++], ctx);
            g.inundation = textio::parse_double(f[c++], ctx);
        }
        store.records.push_back(std::move(r));
    }
    store.resample_steps = cfg.schedule();
    store.posterior_start = posterior_start_for(cfg);
    return store;
}

Diagnostics diagnostics(const SampleStore& store, int window) {
    if (store.records.empty()) throw ConfigError("diagnostics: empty sample store");
    const int P = static_cast<int>(store.param_names.size());

    long max_step = 0;
    int max_chain = 0;
    for (const auto& r : store.records) {
        max_step = std::max(max_step, r.step);
        max_chain = std::max(max_chain, r.chain);
    }
    const int M = max_chain + 1;

    Diagnostics d;
    // per-step cross-chain sums, then a sliding window over steps
    d.rolling.assign(P, {});
    std::vector<std::vector<double>> step_sum(P), step_sumsq(P);
    std::vector<std::vector<int>> step_n(P);
    for (int p = 0; p < P; ++p) {
        step_sum[p].assign(max_step + 1, 0.0);
        step_sumsq[p].assign(max_step + 1, 0.0);
        step_n[p].assign(max_step + 1, 0);
    }
    for (const auto& r : store.records)
        for (int p = 0; p < P; ++p) {
            step_sum[p][r.step] += r.params[p];
            step_sumsq[p][r.step] += r.params[p] * r.params[p];
            ++step_n[p][r.step];
        }
    for (int p = 0; p < P; ++p) {
        auto& roll = d.rolling[p];
        double wsum = 0, wsumsq = 0;
        long wn = 0;
        for (long s = 0; s <= max_step; ++s) {
            wsum += step_sum[p][s];
            wsumsq += step_sumsq[p][s];
            wn += step_n[p][s];
            if (s >= window) {
                wsum -= step_sum[p][s - window];
                wsumsq -= step_sumsq[p][s - window];
                wn -= step_n[p][s - window];
            }
            if (wn == 0) continue;
            const double mean = wsum / wn;
            const double var = wn > 1 ? std::max(0.0, (wsumsq - wn * mean * mean) / (wn - 1))
                                      : 0.0;
            roll.steps.push_back(s);
            roll.mean.push_back(mean);
            roll.std.push_back(std::sqrt(var));
        }
    }

    d.accepted.assign(M, 0);
    d.proposed.assign(M, 0);
    for (const auto& r : store.records) {
        if (r.step == 0) continue;
        ++d.proposed[r.chain];
        if (r.accepted) ++d.accepted[r.chain];
    }
    d.acceptance_rate.assign(M, 0.0);
    for (int c = 0; c < M; ++c)
        d.acceptance_rate[c] = d.proposed[c] ? static_cast<double>(d.accepted[c]) / d.proposed[c]
                                             : 0.0;

    const auto post = store.posterior_set();
    if (post.empty()) throw ConfigError("diagnostics: posterior set is empty");
    d.posterior.resize(P);
    for (int p = 0; p < P; ++p) {
        std::vector<double> v;
        v.reserve(post.size());
        for (const auto* r : post) v.push_back(r->params[p]);
        std::sort(v.begin(), v.end());
        const double n = static_cast<double>(v.size());
        double mean = 0;
        for (double x : v) mean += x;
        mean /= n;
        double var = 0;
        for (double x : v) var += (x - mean) * (x - mean);
        var = v.size() > 1 ? var / (n - 1) : 0.0;
        auto quant = [&](double q) {
            const double pos = q * (n - 1);
            const std::size_t lo = static_cast<std::size_t>(pos);
            const std::size_t hi = std::min<std::size_t>(lo + 1, v.size() - 1);
            return v[lo] + (pos - lo) * (v[hi] - v[lo]);
        };
        d.posterior[p] = {mean, std::sqrt(var), quant(0.05), quant(0.25),
                          quant(0.50), quant(0.75), quant(0.95)};
    }

    const SampleRecord* map = post[0];
    const SampleRecord* mle = post[0];
    for (const auto* r : post) {
        if (r->log_post > map->log_post) map = r;
        if (r->log_lik > mle->log_lik) mle = r;
    }
    d.map_record = *map;
    d.mle_record = *mle;
    return d;
}

}  // namespace quakeinv::mcmc
