#include "stabcode/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "stabcode/det_random.hpp"

namespace stabcode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Difference-equation evaluator y_t = -sum den[i] y_{t-i} + sum num[i] x_{t-i}
// with ring-buffer histories; den[0] == 1.
class SisoFilter {
public:
    explicit SisoFilter(const TransferFunction& tf) : num_(tf.num()), den_(tf.den()) {
        const std::size_t n = std::max(num_.size(), den_.size());
        x_.assign(std::max<std::size_t>(n, 1), 0.0);
        y_.assign(std::max<std::size_t>(n, 1), 0.0);
    }

    double step(double x) {
        push(x_, px_, x);
        double acc = 0.0;
        for (std::size_t i = 0; i < num_.size(); ++i) acc += num_[i] * at(x_, px_, i);
        for (std::size_t i = 1; i < den_.size(); ++i) acc -= den_[i] * at(y_, py_, i - 1);
        push(y_, py_, acc);
        return acc;
    }

private:
    static void push(std::vector<double>& buf, std::size_t& pos, double v) {
        pos = (pos + buf.size() - 1) % buf.size();
        buf[pos] = v;
    }
    static double at(const std::vector<double>& buf, std::size_t pos, std::size_t lag) {
        return buf[(pos + lag) % buf.size()];
    }

    std::vector<double> num_, den_;
    std::vector<double> x_, y_;
    std::size_t px_ = 0, py_ = 0;
};

// Shared-state realization of one plant row [P_d(z) P_u(z)] over the least
// common denominator, so unstable modes excited by d are the same modes the
// feedback stabilizes through u. Simulating the two entries separately would
// let their private unstable states drift even in a stable loop.
class PlantRow {
public:
    PlantRow(const TransferFunction& pd, const TransferFunction& pu) {
        const TransferFunction d = pd.simplified();
        const TransferFunction u = pu.simplified();
        auto rd = poly::roots(d.den());
        auto ru = poly::roots(u.den());
        // split into shared and private denominator roots
        std::vector<std::complex<double>> only_u = ru;
        std::vector<std::complex<double>> rd_copy = rd;
        for (std::size_t i = 0; i < only_u.size();) {
            bool matched = false;
            for (std::size_t j = 0; j < rd_copy.size(); ++j) {
                if (std::abs(only_u[i] - rd_copy[j]) <= 1e-7 * std::max(1.0, std::abs(rd_copy[j]))) {
                    rd_copy.erase(rd_copy.begin() + static_cast<long>(j));
                    only_u.erase(only_u.begin() + static_cast<long>(i));
                    matched = true;
                    break;
                }
            }
            if (!matched) ++i;
        }
        const std::vector<std::complex<double>>& only_d = rd_copy;
        const auto cof_u = monic_c0(only_u);  // multiplies P_d's den to reach the lcm
        const auto cof_d = monic_c0(only_d);
        den_ = poly::mul(d.den(), cof_u);
        num_d_ = poly::mul(d.num(), cof_u);
        num_u_ = poly::mul(u.num(), cof_d);
        const std::size_t n = std::max({den_.size(), num_d_.size(), num_u_.size(), std::size_t{1}});
        dh_.assign(n, 0.0);
        uh_.assign(n, 0.0);
        yh_.assign(n, 0.0);
    }

    double u_feedthrough() const { return num_u_.empty() ? 0.0 : num_u_[0]; }

    // Output using inputs up to t-1 plus the current d (and current u when
    // `u_now` is provided); histories advance only in commit().
    double output(double d_now, double u_now) const {
        double acc = 0.0;
        if (!num_d_.empty()) acc += num_d_[0] * d_now;
        if (!num_u_.empty()) acc += num_u_[0] * u_now;
        for (std::size_t i = 1; i < num_d_.size(); ++i) acc += num_d_[i] * at(dh_, pd_, i - 1);
        for (std::size_t i = 1; i < num_u_.size(); ++i) acc += num_u_[i] * at(uh_, pu_, i - 1);
        for (std::size_t i = 1; i < den_.size(); ++i) acc -= den_[i] * at(yh_, py_, i - 1);
        return acc;
    }

    void commit(double d_now, double u_now, double y_now) {
        push(dh_, pd_, d_now);
        push(uh_, pu_, u_now);
        push(yh_, py_, y_now);
    }

private:
    static std::vector<double> monic_c0(const std::vector<std::complex<double>>& rts) {
        if (rts.empty()) return {1.0};
        std::vector<double> p = poly::from_roots(rts, 1.0);
        if (std::abs(p[0]) < 1e-12)
            throw std::invalid_argument("plant denominator root at z^-1 = 0");
        const double c0 = p[0];
        for (double& v : p) v /= c0;
        return p;
    }
    static void push(std::vector<double>& buf, std::size_t& pos, double v) {
        pos = (pos + buf.size() - 1) % buf.size();
        buf[pos] = v;
    }
    static double at(const std::vector<double>& buf, std::size_t pos, std::size_t lag) {
        return buf[(pos + lag) % buf.size()];
    }

    std::vector<double> den_, num_d_, num_u_;
    std::vector<double> dh_, uh_, yh_;
    std::size_t pd_ = 0, pu_ = 0, py_ = 0;
};

struct Welford {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    void add(double x) {
        ++n;
        const double d1 = x - mean;
        mean += d1 / static_cast<double>(n);
        m2 += d1 * (x - mean);
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

}  // namespace

std::string to_string(CoderKind kind) {
    switch (kind) {
        case CoderKind::Independent: return "independent";
        case CoderKind::MultipleDescriptions: return "multiple_descriptions";
        case CoderKind::Repetition: return "repetition";
        case CoderKind::AdditiveGaussian: return "additive_gaussian";
    }
    return "?";
}

CoderKind coder_kind_from_string(const std::string& s) {
    if (s == "independent") return CoderKind::Independent;
    if (s == "multiple_descriptions" || s == "md") return CoderKind::MultipleDescriptions;
    if (s == "repetition") return CoderKind::Repetition;
    if (s == "additive_gaussian" || s == "awgn") return CoderKind::AdditiveGaussian;
    throw std::invalid_argument("unknown coder kind: " + s);
}

SimMetrics run_closed_loop(const SimConfig& config) {
    if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (config.divergence_threshold <= 0.0)
        throw std::invalid_argument("divergence threshold must be positive");
    const int k = config.coder == CoderKind::AdditiveGaussian ? 1 : config.code.k;
    if (k < 1) throw std::invalid_argument("code must emit at least one description");

    PlantRow e_row(config.plant.p11, config.plant.p12);
    PlantRow y_row(config.plant.p21, config.plant.p22);
    if (std::abs(y_row.u_feedthrough()) > 1e-12)
        throw std::invalid_argument("p22 must be strictly proper for simulation (no same-step algebraic loop)");

    SisoFilter f_ly(config.filters.l_y);
    SisoFilter f_lw(config.filters.l_w);
    SisoFilter f_f(config.filters.f);

    const DitheredQuantizer quant{config.quantizer_step, config.dither_seed};
    IndexAssignment ia = config.assignment;
    ia.dither_seed = config.dither_seed;
    const double awgn_sigma = std::sqrt(std::max(config.awgn_sigma_q_sq, 0.0));

    const bool ladder = config.measure_ladder && config.coder != CoderKind::AdditiveGaussian;
    std::vector<double> err_now(static_cast<std::size_t>(k), 0.0);
    std::vector<double> err_sum(static_cast<std::size_t>(k), 0.0);
    std::vector<std::vector<double>> err_cross(static_cast<std::size_t>(k),
                                               std::vector<double>(static_cast<std::size_t>(k), 0.0));
    Welford full_err;
    std::vector<std::unordered_map<std::int64_t, std::uint64_t>> hist(static_cast<std::size_t>(k));

    Welford we, wv;
    double w_prev_decoded = 0.0;
    double lw_prev = 0.0;
    bool diverged = false;
    std::uint64_t used = 0;

    std::vector<int> all_received(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) all_received[static_cast<std::size_t>(j)] = j + 1;

    for (std::uint64_t t = 0; t < config.horizon; ++t) {
        const double d = detrng::gaussian(config.disturbance_seed, t, 0);
        const double y = y_row.output(d, 0.0);
        if (!std::isfinite(y) || std::abs(y) > config.divergence_threshold) {
            diverged = true;
            break;
        }
        const double v = f_ly.step(y) + lw_prev;

        // encode -> channel -> decode
        double w = 0.0;
        DescriptionSet ds;
        switch (config.coder) {
            case CoderKind::Independent:
                ds = independent_encodings(v, quant, k, t);
                break;
            case CoderKind::Repetition:
                ds = repetition_encode(v, quant, k, t);
                break;
            case CoderKind::MultipleDescriptions:
                ds = md_encode(v, ia, t);
                break;
            case CoderKind::AdditiveGaussian:
                break;
        }
        if (config.coder == CoderKind::AdditiveGaussian) {
            const bool lost = config.channel.loss_probability > 0.0 &&
                              detrng::uniform01(config.channel.rng_seed, t, 1) <=
                                  config.channel.loss_probability &&
                              config.min_guaranteed_received < 1;
            if (lost) {
                w = config.zero_policy == ZeroReceptionPolicy::ZeroFill ? 0.0 : w_prev_decoded;
            } else {
                w = v + awgn_sigma * detrng::gaussian(config.dither_seed, t, 1);
            }
        } else {
            ReceptionRecord rec = transmit(ds, config.channel);
            if (static_cast<int>(rec.received.size()) < config.min_guaranteed_received) {
                rec.received.clear();
                for (int j = 1; j <= config.min_guaranteed_received && j <= k; ++j)
                    rec.received.push_back(j);
            }
            if (rec.received.empty()) {
                w = config.zero_policy == ZeroReceptionPolicy::ZeroFill ? 0.0 : w_prev_decoded;
            } else {
                switch (config.coder) {
                    case CoderKind::Independent:
                        w = decode_average(ds, rec.received, quant);
                        break;
                    case CoderKind::Repetition:
                        w = repetition_decode(ds, quant);
                        break;
                    case CoderKind::MultipleDescriptions:
                        w = md_decode(ds, ia, rec.received);
                        break;
                    case CoderKind::AdditiveGaussian:
                        break;
                }
            }
        }
        w_prev_decoded = w;

        const double u = f_f.step(w);
        const double e = e_row.output(d, u);
        if (!std::isfinite(e) || std::abs(e) > config.divergence_threshold) {
            diverged = true;
            break;
        }

        lw_prev = f_lw.step(w);
        e_row.commit(d, u, e);
        y_row.commit(d, u, y);

        if (t < config.burn_in) continue;
        ++used;
        we.add(e);
        wv.add(v);
        if (ladder) {
            // counterfactual per-description errors, independent of the channel
            switch (config.coder) {
                case CoderKind::Independent:
                    for (int j = 1; j <= k; ++j)
                        err_now[static_cast<std::size_t>(j - 1)] =
                            dithered_decode(ds.payloads[static_cast<std::size_t>(j - 1)], quant, t,
                                            static_cast<std::uint32_t>(j)) -
                            v;
                    full_err.add(decode_average(ds, all_received, quant) - v);
                    break;
                case CoderKind::Repetition:
                    for (int j = 1; j <= k; ++j)
                        err_now[static_cast<std::size_t>(j - 1)] = repetition_decode(ds, quant) - v;
                    full_err.add(repetition_decode(ds, quant) - v);
                    break;
                case CoderKind::MultipleDescriptions:
                    for (int j = 1; j <= k; ++j)
                        err_now[static_cast<std::size_t>(j - 1)] =
                            md_decode(ds, ia, std::vector<int>{j}) - v;
                    full_err.add(md_decode(ds, ia, all_received) - v);
                    break;
                case CoderKind::AdditiveGaussian:
                    break;
            }
            for (int i = 0; i < k; ++i) {
                err_sum[static_cast<std::size_t>(i)] += err_now[static_cast<std::size_t>(i)];
                for (int j = i; j < k; ++j)
                    err_cross[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                        err_now[static_cast<std::size_t>(i)] * err_now[static_cast<std::size_t>(j)];
            }
            for (int j = 0; j < k; ++j) ++hist[static_cast<std::size_t>(j)][ds.payloads[static_cast<std::size_t>(j)]];
        }
    }

    SimMetrics out;
    out.diverged = diverged;
    out.samples_used = used;
    if (diverged || used < 2) {
        out.sigma_e_sq_hat = kInf;
        out.sigma_v_sq_hat = kInf;
        out.snr_all = 0.0;
        out.diverged = true;
        return out;
    }
    out.sigma_e_sq_hat = we.variance();
    out.sigma_v_sq_hat = wv.variance();

    if (ladder && used > 1) {
        const double n = static_cast<double>(used);
        std::vector<double> mean(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) mean[static_cast<std::size_t>(j)] = err_sum[static_cast<std::size_t>(j)] / n;
        auto cov = [&](int i, int j) {
            const int a = std::min(i, j), b = std::max(i, j);
            return err_cross[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] / n -
                   mean[static_cast<std::size_t>(a)] * mean[static_cast<std::size_t>(b)];
        };
        double vbar = 0.0, cbar = 0.0, corr = 0.0;
        int pairs = 0;
        for (int i = 0; i < k; ++i) vbar += cov(i, i);
        vbar /= k;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                cbar += cov(i, j);
                corr += cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
                ++pairs;
            }
        if (pairs) {
            cbar /= pairs;
            corr /= pairs;
        }
        out.rho_hat = corr;
        out.snr_per_ell.resize(static_cast<std::size_t>(k));
        for (int ell = 1; ell <= k; ++ell) {
            double var_ell;
            if (ell == k) {
                var_ell = full_err.variance();
            } else {
                var_ell = vbar / ell + cbar * (ell - 1) / ell;
            }
            out.snr_per_ell[static_cast<std::size_t>(ell - 1)] =
                var_ell > 0.0 ? out.sigma_v_sq_hat / var_ell : kInf;
        }
        out.snr_all = out.snr_per_ell.back();

        double hsum = 0.0;
        for (int j = 0; j < k; ++j) {
            double h = 0.0;
            for (const auto& [sym, count] : hist[static_cast<std::size_t>(j)]) {
                (void)sym;
                const double p = static_cast<double>(count) / n;
                h -= p * std::log2(p);
            }
            hsum += h;
        }
        out.entropy_per_description = hsum / k;
        out.sum_rate_hat = hsum;
    }
    return out;
}

std::vector<SweepRow> run_sweep(const std::vector<SimConfig>& configs,
                                const std::vector<double>& loss_grid, int threads) {
    if (loss_grid.empty()) throw std::invalid_argument("loss grid must be nonempty");
    std::vector<SweepRow> rows(configs.size() * loss_grid.size());
    if (configs.empty()) return rows;
    std::atomic<std::size_t> next{0};
    const std::size_t total = rows.size();
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned nthreads = threads > 0 ? static_cast<unsigned>(threads)
                                          : std::min<unsigned>(hw, static_cast<unsigned>(total));
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            const std::size_t si = i / loss_grid.size();
            const std::size_t pi = i % loss_grid.size();
            SweepRow& row = rows[i];
            row.scheme_index = si;
            row.loss_probability = loss_grid[pi];
            SimConfig cell = configs[si];
            cell.channel.loss_probability = loss_grid[pi];
            try {
                row.metrics = run_closed_loop(cell);
            } catch (const std::exception& ex) {
                row.failed = true;
                row.error = ex.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rows;
}

ComparisonReport theoretical_vs_measured(const SimConfig& config) {
    if (config.channel.loss_probability != 0.0)
        throw std::invalid_argument("theoretical comparison requires a zero-loss configuration");
    ComparisonReport rep;
    const SimMetrics metrics = run_closed_loop(config);
    if (metrics.diverged) return rep;  // valid stays false

    const ClosedLoopMaps maps = closed_loop_maps(config.plant, config.filters);
    const double s1 = h2_norm_sq((maps.s - TransferFunction::constant(1.0)).simplified());
    const double m = h2_norm_sq(maps.l_y_p21_s);
    const double p12fs = h2_norm_sq(maps.p12_f_s);
    const double nominal = h2_norm_sq(maps.nominal);

    const int k = config.coder == CoderKind::AdditiveGaussian ? 1 : config.code.k;
    double noise_eff = 0.0;  // loop noise variance at zero loss
    std::vector<double> ladder_pred;
    switch (config.coder) {
        case CoderKind::Independent: {
            const double sigma_sq = config.quantizer_step * config.quantizer_step / 12.0;
            noise_eff = combined_noise_variance(sigma_sq, k, config.code.rho);
            const double sigma_v_pred = m + s1 * noise_eff;
            for (int ell = 1; ell <= k; ++ell)
                ladder_pred.push_back(sigma_v_pred / combined_noise_variance(sigma_sq, ell, 0.0));
            break;
        }
        case CoderKind::Repetition: {
            const double sigma_sq = config.quantizer_step * config.quantizer_step / 12.0;
            noise_eff = sigma_sq;  // identical copies, no averaging gain
            const double sigma_v_pred = m + s1 * noise_eff;
            ladder_pred.assign(static_cast<std::size_t>(k), sigma_v_pred / sigma_sq);
            break;
        }
        case CoderKind::MultipleDescriptions: {
            const double step2 = config.assignment.central_step * config.assignment.central_step;
            noise_eff = step2 / 12.0;
            const double sigma_v_pred = m + s1 * noise_eff;
            ladder_pred = predict_md_ladder(config.assignment, std::sqrt(sigma_v_pred));
            break;
        }
        case CoderKind::AdditiveGaussian: {
            noise_eff = config.awgn_sigma_q_sq;
            ladder_pred.push_back((m + s1 * noise_eff) / noise_eff);
            break;
        }
    }

    rep.ladder_predicted = ladder_pred;
    rep.ladder_measured = config.coder == CoderKind::AdditiveGaussian
                              ? std::vector<double>{metrics.sigma_v_sq_hat / noise_eff}
                              : metrics.snr_per_ell;
    rep.ladder_rel_dev.resize(ladder_pred.size(), 0.0);
    for (std::size_t i = 0; i < ladder_pred.size() && i < rep.ladder_measured.size(); ++i)
        rep.ladder_rel_dev[i] = std::abs(rep.ladder_measured[i] - ladder_pred[i]) /
                                std::max(ladder_pred[i], 1e-300);

    rep.sigma_e_predicted = nominal + p12fs * noise_eff;
    rep.sigma_e_measured = metrics.sigma_e_sq_hat;
    rep.sigma_e_rel_dev =
        std::abs(rep.sigma_e_measured - rep.sigma_e_predicted) / std::max(rep.sigma_e_predicted, 1e-300);

    rep.gamma_predicted = s1 + m / noise_eff;
    rep.gamma_measured = metrics.sigma_v_sq_hat / noise_eff;
    rep.gamma_rel_dev =
        std::abs(rep.gamma_measured - rep.gamma_predicted) / std::max(rep.gamma_predicted, 1e-300);
    rep.valid = true;
    return rep;
}

}  // namespace stabcode
