#include "echo/bicm.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>

#include <Eigen/Dense>

#include "echo/errors.hpp"
#include "echo/kernels.hpp"

namespace echo::bicm {

namespace {

// Iteratively removes nodes whose multipliers have no finite solution:
// zero-degree nodes (every incident probability is 0) and full-degree nodes
// (every incident probability is 1, and the opposite layer loses one degree
// each). Passes are numbered 2*round for the zero pass and 2*round + 1 for
// the full pass, so a smaller pass number always means "stripped earlier".
void strip_degenerate(std::vector<int>& red_top, std::vector<int>& red_bottom,
                      std::vector<int>& strip_top, std::vector<int>& strip_bottom) {
    const std::size_t nt = red_top.size();
    const std::size_t nb = red_bottom.size();
    strip_top.assign(nt, -1);
    strip_bottom.assign(nb, -1);
    int active_top = static_cast<int>(nt);
    int active_bottom = static_cast<int>(nb);

    for (int round = 0;; ++round) {
        bool stripped_any = false;

        const int zero_pass = 2 * round;
        for (std::size_t i = 0; i < nt; ++i) {
            if (strip_top[i] == -1 && red_top[i] == 0) {
                strip_top[i] = zero_pass;
                --active_top;
                stripped_any = true;
            }
        }
        for (std::size_t a = 0; a < nb; ++a) {
            if (strip_bottom[a] == -1 && red_bottom[a] == 0) {
                strip_bottom[a] = zero_pass;
                --active_bottom;
                stripped_any = true;
            }
        }

        // Full nodes are detected against the counts left after the zero
        // pass; both layers are collected before any degree is decremented
        // so that two nodes going full in the same pass see each other.
        const int full_pass = 2 * round + 1;
        std::vector<std::size_t> full_top;
        std::vector<std::size_t> full_bottom;
        if (active_bottom > 0) {
            for (std::size_t i = 0; i < nt; ++i) {
                if (strip_top[i] == -1 && red_top[i] == active_bottom) full_top.push_back(i);
            }
        }
        if (active_top > 0) {
            for (std::size_t a = 0; a < nb; ++a) {
                if (strip_bottom[a] == -1 && red_bottom[a] == active_top) full_bottom.push_back(a);
            }
        }
        for (std::size_t i : full_top) {
            strip_top[i] = full_pass;
            --active_top;
        }
        for (std::size_t a : full_bottom) {
            strip_bottom[a] = full_pass;
            --active_bottom;
        }
        if (!full_top.empty()) {
            for (std::size_t a = 0; a < nb; ++a) {
                if (strip_bottom[a] == -1) red_bottom[a] -= static_cast<int>(full_top.size());
            }
        }
        if (!full_bottom.empty()) {
            for (std::size_t i = 0; i < nt; ++i) {
                if (strip_top[i] == -1) red_top[i] -= static_cast<int>(full_bottom.size());
            }
        }
        stripped_any = stripped_any || !full_top.empty() || !full_bottom.empty();
        if (!stripped_any) break;
    }
}

struct ReducedSystem {
    // one entry per distinct reduced degree, ascending
    std::vector<double> x, y;          // multipliers
    std::vector<double> nw, mw;        // class sizes as doubles (kernel weights)
    std::vector<double> kt, kb;        // reduced target degrees
};

double raw_log_likelihood(const ReducedSystem& s) {
    double value = 0.0;
    for (std::size_t c = 0; c < s.x.size(); ++c) value += s.nw[c] * s.kt[c] * std::log(s.x[c]);
    for (std::size_t d = 0; d < s.y.size(); ++d) value += s.mw[d] * s.kb[d] * std::log(s.y[d]);
    for (std::size_t c = 0; c < s.x.size(); ++c) {
        double sum = 0.0;
        for (std::size_t d = 0; d < s.y.size(); ++d) sum += s.mw[d] * std::log1p(s.x[c] * s.y[d]);
        value -= s.nw[c] * sum;
    }
    return value;
}

double max_residual(const ReducedSystem& s) {
    double worst = 0.0;
    const std::size_t cb = s.y.size();
    const std::size_t ct = s.x.size();
    for (std::size_t c = 0; c < ct; ++c) {
        const double expected =
            kernels::logistic_fraction_sum(s.x[c], s.y.data(), s.mw.data(), cb);
        worst = std::max(worst, std::abs(expected - s.kt[c]));
    }
    for (std::size_t d = 0; d < cb; ++d) {
        const double expected =
            kernels::logistic_fraction_sum(s.y[d], s.x.data(), s.nw.data(), ct);
        worst = std::max(worst, std::abs(expected - s.kb[d]));
    }
    return worst;
}

// One damped fixed-point proposal in log space: the top layer first, then the
// bottom layer against the new top multipliers.
void propose_fixed_point(const ReducedSystem& s, double damping,
                         std::vector<double>& x_new, std::vector<double>& y_new) {
    const std::size_t ct = s.x.size();
    const std::size_t cb = s.y.size();
    x_new.resize(ct);
    y_new.resize(cb);
    for (std::size_t c = 0; c < ct; ++c) {
        const double denom = kernels::logistic_weight_sum(s.x[c], s.y.data(), s.mw.data(), cb);
        const double fp = s.kt[c] / denom;
        x_new[c] = std::exp((1.0 - damping) * std::log(s.x[c]) + damping * std::log(fp));
    }
    for (std::size_t d = 0; d < cb; ++d) {
        const double denom = kernels::logistic_weight_sum(s.y[d], x_new.data(), s.nw.data(), ct);
        const double fp = s.kb[d] / denom;
        y_new[d] = std::exp((1.0 - damping) * std::log(s.y[d]) + damping * std::log(fp));
    }
}

// Newton step on the class-weighted gradient in (log x, log y) coordinates.
// The weighted Hessian is symmetric positive semidefinite (the likelihood is
// concave and invariant under x -> t*x, y -> y/t), so a tiny ridge fixes the
// gauge direction before the solve.
bool newton_step(ReducedSystem& s, double& log_lik) {
    const std::size_t ct = s.x.size();
    const std::size_t cb = s.y.size();
    const auto n = static_cast<Eigen::Index>(ct + cb);
    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd gradient(n);

    for (std::size_t c = 0; c < ct; ++c) {
        const double expected =
            kernels::logistic_fraction_sum(s.x[c], s.y.data(), s.mw.data(), cb);
        gradient(static_cast<Eigen::Index>(c)) = s.nw[c] * (s.kt[c] - expected);
    }
    for (std::size_t d = 0; d < cb; ++d) {
        const double expected =
            kernels::logistic_fraction_sum(s.y[d], s.x.data(), s.nw.data(), ct);
        gradient(static_cast<Eigen::Index>(ct + d)) = s.mw[d] * (s.kb[d] - expected);
    }
    for (std::size_t c = 0; c < ct; ++c) {
        for (std::size_t d = 0; d < cb; ++d) {
            const double p = s.x[c] * s.y[d] / (1.0 + s.x[c] * s.y[d]);
            const double w = s.nw[c] * s.mw[d] * p * (1.0 - p);
            const auto ic = static_cast<Eigen::Index>(c);
            const auto id = static_cast<Eigen::Index>(ct + d);
            hessian(ic, ic) += w;
            hessian(id, id) += w;
            hessian(ic, id) = w;
            hessian(id, ic) = w;
        }
    }
    const double ridge = 1e-12 * std::max(1.0, hessian.diagonal().maxCoeff());
    hessian.diagonal().array() += ridge;

    const Eigen::VectorXd delta = hessian.ldlt().solve(gradient);
    if (!delta.allFinite()) return false;

    const double base_residual = max_residual(s);
    ReducedSystem trial = s;
    double step = 1.0;
    for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
        for (std::size_t c = 0; c < ct; ++c) {
            trial.x[c] = s.x[c] * std::exp(step * delta(static_cast<Eigen::Index>(c)));
        }
        for (std::size_t d = 0; d < cb; ++d) {
            trial.y[d] = s.y[d] * std::exp(step * delta(static_cast<Eigen::Index>(ct + d)));
        }
        const double trial_lik = raw_log_likelihood(trial);
        const double slack = 1e-13 * (1.0 + std::abs(log_lik));
        if (trial_lik >= log_lik - slack && max_residual(trial) < base_residual) {
            s.x = trial.x;
            s.y = trial.y;
            log_lik = std::max(log_lik, trial_lik);
            return true;
        }
    }
    return false;
}

}  // namespace

int BicmModel::top_class_of(int i) const {
    return top_key_[static_cast<std::size_t>(i)];
}

int BicmModel::bottom_class_of(int a) const {
    return bottom_key_[static_cast<std::size_t>(a)];
}

double BicmModel::link_probability(int i, int a) const {
    if (i < 0 || i >= top_count() || a < 0 || a >= bottom_count()) {
        throw InputError("link_probability: node index out of range");
    }
    const int si = top_strip_[static_cast<std::size_t>(i)];
    const int sa = bottom_strip_[static_cast<std::size_t>(a)];
    if (si == -1 && sa == -1) {
        const double x = top_classes_[static_cast<std::size_t>(top_key_[static_cast<std::size_t>(i)])].multiplier;
        const double y = bottom_classes_[static_cast<std::size_t>(bottom_key_[static_cast<std::size_t>(a)])].multiplier;
        return x * y / (1.0 + x * y);
    }
    // the earliest-stripped endpoint fixes the probability
    int rule;
    if (si != -1 && (sa == -1 || si <= sa)) {
        rule = si;
    } else {
        rule = sa;
    }
    return (rule % 2 == 0) ? 0.0 : 1.0;
}

double BicmModel::top_probability_vs_class(int i, int bottom_class) const {
    const int si = top_strip_[static_cast<std::size_t>(i)];
    if (si != -1) return (si % 2 == 0) ? 0.0 : 1.0;
    const double x = top_classes_[static_cast<std::size_t>(top_key_[static_cast<std::size_t>(i)])].multiplier;
    const double y = bottom_classes_[static_cast<std::size_t>(bottom_class)].multiplier;
    return x * y / (1.0 + x * y);
}

int BicmModel::top_status_key(int i) const {
    const int s = top_strip_[static_cast<std::size_t>(i)];
    return s == -1 ? top_key_[static_cast<std::size_t>(i)] : -2 - s;
}

int BicmModel::bottom_status_key(int a) const {
    const int s = bottom_strip_[static_cast<std::size_t>(a)];
    return s == -1 ? bottom_key_[static_cast<std::size_t>(a)] : -2 - s;
}

std::pair<std::vector<double>, std::vector<double>> BicmModel::expected_degrees() const {
    const std::size_t nt = top_key_.size();
    const std::size_t nb = bottom_key_.size();

    // Sorted strip passes of the opposite layer: all stripped nodes, and the
    // ones stripped in a full pass (probability 1 against later nodes).
    auto stripped_orders = [](const std::vector<int>& strip) {
        std::vector<int> all, full;
        for (int s : strip) {
            if (s == -1) continue;
            all.push_back(s);
            if (s % 2 == 1) full.push_back(s);
        }
        std::sort(all.begin(), all.end());
        std::sort(full.begin(), full.end());
        return std::pair<std::vector<int>, std::vector<int>>(std::move(all), std::move(full));
    };
    const auto [b_all, b_full] = stripped_orders(bottom_strip_);
    const auto [t_all, t_full] = stripped_orders(top_strip_);

    // Expected degree against all active opposite classes, one value per class.
    std::vector<double> per_top_class(top_classes_.size(), 0.0);
    for (std::size_t c = 0; c < top_classes_.size(); ++c) {
        double sum = 0.0;
        for (const auto& bc : bottom_classes_) {
            const double xy = top_classes_[c].multiplier * bc.multiplier;
            sum += static_cast<double>(bc.count) * xy / (1.0 + xy);
        }
        per_top_class[c] = sum;
    }
    std::vector<double> per_bottom_class(bottom_classes_.size(), 0.0);
    for (std::size_t d = 0; d < bottom_classes_.size(); ++d) {
        double sum = 0.0;
        for (const auto& tc : top_classes_) {
            const double xy = tc.multiplier * bottom_classes_[d].multiplier;
            sum += static_cast<double>(tc.count) * xy / (1.0 + xy);
        }
        per_bottom_class[d] = sum;
    }

    auto expected_for = [](int strip, int key, const std::vector<double>& per_class,
                           const std::vector<int>& opp_all, const std::vector<int>& opp_full,
                           std::size_t opp_total) {
        if (strip == -1) {
            // active: every stripped-full opposite node contributes exactly 1
            return per_class[static_cast<std::size_t>(key)] + static_cast<double>(opp_full.size());
        }
        // stripped: opposite nodes stripped strictly earlier follow their own
        // rule; everything else (later or active) follows this node's rule.
        const auto earlier_full = static_cast<double>(
            std::lower_bound(opp_full.begin(), opp_full.end(), strip) - opp_full.begin());
        const auto earlier_all = static_cast<double>(
            std::lower_bound(opp_all.begin(), opp_all.end(), strip) - opp_all.begin());
        double value = earlier_full;
        if (strip % 2 == 1) value += static_cast<double>(opp_total) - earlier_all;
        return value;
    };

    std::vector<double> top(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        top[i] = expected_for(top_strip_[i], top_key_[i], per_top_class, b_all, b_full, nb);
    }
    std::vector<double> bottom(nb, 0.0);
    for (std::size_t a = 0; a < nb; ++a) {
        bottom[a] = expected_for(bottom_strip_[a], bottom_key_[a], per_bottom_class, t_all, t_full, nt);
    }
    return {std::move(top), std::move(bottom)};
}

nlohmann::json BicmModel::to_json() const {
    auto classes_json = [](const std::vector<DegreeClass>& classes) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& c : classes) {
            out.push_back({{"degree", c.degree},
                           {"reduced_degree", c.reduced_degree},
                           {"count", c.count},
                           {"multiplier", c.multiplier}});
        }
        return out;
    };
    return nlohmann::json{{"top_count", top_count()},
                          {"bottom_count", bottom_count()},
                          {"top_classes", classes_json(top_classes_)},
                          {"bottom_classes", classes_json(bottom_classes_)},
                          {"top_class_index", top_key_},
                          {"bottom_class_index", bottom_key_},
                          {"top_strip_pass", top_strip_},
                          {"bottom_strip_pass", bottom_strip_},
                          {"tolerance_achieved", tolerance_achieved_},
                          {"iterations", iterations_}};
}

BicmModel BicmModel::from_json(const nlohmann::json& j) {
    auto classes_from = [](const nlohmann::json& arr) {
        std::vector<DegreeClass> classes;
        for (const auto& c : arr) {
            DegreeClass dc;
            dc.degree = c.at("degree").get<int>();
            dc.reduced_degree = c.at("reduced_degree").get<int>();
            dc.count = c.at("count").get<int>();
            dc.multiplier = c.at("multiplier").get<double>();
            classes.push_back(dc);
        }
        return classes;
    };
    BicmModel model;
    model.top_classes_ = classes_from(j.at("top_classes"));
    model.bottom_classes_ = classes_from(j.at("bottom_classes"));
    model.top_key_ = j.at("top_class_index").get<std::vector<int>>();
    model.bottom_key_ = j.at("bottom_class_index").get<std::vector<int>>();
    model.top_strip_ = j.at("top_strip_pass").get<std::vector<int>>();
    model.bottom_strip_ = j.at("bottom_strip_pass").get<std::vector<int>>();
    model.tolerance_achieved_ = j.at("tolerance_achieved").get<double>();
    model.iterations_ = j.at("iterations").get<int>();
    const auto nt = static_cast<std::size_t>(j.at("top_count").get<int>());
    const auto nb = static_cast<std::size_t>(j.at("bottom_count").get<int>());
    if (model.top_key_.size() != nt || model.bottom_key_.size() != nb ||
        model.top_strip_.size() != nt || model.bottom_strip_.size() != nb) {
        throw InputError("model file is inconsistent");
    }
    return model;
}

double log_likelihood(const std::vector<DegreeClass>& top, const std::vector<DegreeClass>& bottom) {
    ReducedSystem s;
    for (const auto& c : top) {
        s.x.push_back(c.multiplier);
        s.nw.push_back(static_cast<double>(c.count));
        s.kt.push_back(static_cast<double>(c.reduced_degree));
    }
    for (const auto& d : bottom) {
        s.y.push_back(d.multiplier);
        s.mw.push_back(static_cast<double>(d.count));
        s.kb.push_back(static_cast<double>(d.reduced_degree));
    }
    return raw_log_likelihood(s);
}

BicmModel fit(const BipartiteGraph& graph, const FitOptions& options) {
    if (graph.edge_count() == 0) {
        throw InputError("degenerate network: the bipartite graph has no edges");
    }

    std::vector<int> red_top = graph.top_degrees();
    std::vector<int> red_bottom = graph.bottom_degrees();
    BicmModel model;
    strip_degenerate(red_top, red_bottom, model.top_strip_, model.bottom_strip_);

    // Group active nodes by reduced degree; nodes sharing a degree share a
    // multiplier, which shrinks the system to one unknown per distinct degree.
    std::map<int, int> top_degree_to_class;
    std::map<int, int> bottom_degree_to_class;
    const std::size_t nt = red_top.size();
    const std::size_t nb = red_bottom.size();
    for (std::size_t i = 0; i < nt; ++i) {
        if (model.top_strip_[i] == -1) top_degree_to_class.emplace(red_top[i], 0);
    }
    for (std::size_t a = 0; a < nb; ++a) {
        if (model.bottom_strip_[a] == -1) bottom_degree_to_class.emplace(red_bottom[a], 0);
    }
    {
        int next = 0;
        for (auto& [deg, idx] : top_degree_to_class) idx = next++;
        next = 0;
        for (auto& [deg, idx] : bottom_degree_to_class) idx = next++;
    }
    model.top_classes_.resize(top_degree_to_class.size());
    model.bottom_classes_.resize(bottom_degree_to_class.size());
    const std::vector<int>& orig_top = graph.top_degrees();
    const std::vector<int>& orig_bottom = graph.bottom_degrees();
    model.top_key_.assign(nt, -1);
    model.bottom_key_.assign(nb, -1);
    for (std::size_t i = 0; i < nt; ++i) {
        if (model.top_strip_[i] != -1) continue;
        const int cls = top_degree_to_class.at(red_top[i]);
        model.top_key_[i] = cls;
        auto& c = model.top_classes_[static_cast<std::size_t>(cls)];
        c.degree = orig_top[i];
        c.reduced_degree = red_top[i];
        c.count += 1;
    }
    for (std::size_t a = 0; a < nb; ++a) {
        if (model.bottom_strip_[a] != -1) continue;
        const int cls = bottom_degree_to_class.at(red_bottom[a]);
        model.bottom_key_[a] = cls;
        auto& c = model.bottom_classes_[static_cast<std::size_t>(cls)];
        c.degree = orig_bottom[a];
        c.reduced_degree = red_bottom[a];
        c.count += 1;
    }

    if (model.top_classes_.empty()) {
        // Every node was degenerate: the constraints are met exactly by the
        // stripped probabilities and there is nothing left to solve.
        model.tolerance_achieved_ = 0.0;
        model.iterations_ = 0;
        return model;
    }

    ReducedSystem s;
    for (const auto& c : model.top_classes_) {
        s.nw.push_back(static_cast<double>(c.count));
        s.kt.push_back(static_cast<double>(c.reduced_degree));
    }
    for (const auto& d : model.bottom_classes_) {
        s.mw.push_back(static_cast<double>(d.count));
        s.kb.push_back(static_cast<double>(d.reduced_degree));
    }
    double reduced_edges = 0.0;
    for (std::size_t c = 0; c < s.kt.size(); ++c) reduced_edges += s.nw[c] * s.kt[c];
    const double scale = std::sqrt(reduced_edges);
    for (std::size_t c = 0; c < s.kt.size(); ++c) s.x.push_back(s.kt[c] / scale);
    for (std::size_t d = 0; d < s.kb.size(); ++d) s.y.push_back(s.kb[d] / scale);

    double damping = options.initial_damping;
    double log_lik = raw_log_likelihood(s);
    double best_residual = std::numeric_limits<double>::infinity();
    double residual = max_residual(s);
    int stall = 0;
    int iteration = 0;
    bool converged = residual <= options.tolerance;

    std::vector<double> x_new, y_new;
    while (!converged && iteration < options.max_iterations) {
        ++iteration;
        bool accepted = false;
        if (stall >= options.stall_window) {
            accepted = newton_step(s, log_lik);
            stall = 0;
            if (!accepted) damping = std::max(damping * 0.5, 1e-4);
        }
        if (!accepted) {
            // Damped fixed point, re-damped until the likelihood does not
            // drop. The proposal is sign-aligned with the gradient, so a
            // small enough step always ascends and the loop terminates.
            for (int attempt = 0; attempt < 40; ++attempt) {
                propose_fixed_point(s, damping, x_new, y_new);
                ReducedSystem trial = s;
                trial.x = x_new;
                trial.y = y_new;
                const double trial_lik = raw_log_likelihood(trial);
                const double slack = 1e-13 * (1.0 + std::abs(log_lik));
                if (trial_lik >= log_lik - slack) {
                    s.x = std::move(trial.x);
                    s.y = std::move(trial.y);
                    log_lik = std::max(log_lik, trial_lik);
                    damping = std::min(1.0, damping * 1.05);
                    break;
                }
                damping *= 0.5;
            }
        }
        residual = max_residual(s);
        if (residual < best_residual * (1.0 - 1e-3)) {
            best_residual = residual;
            stall = 0;
        } else {
            ++stall;
        }
        if (options.on_iterate) options.on_iterate(iteration, residual, log_lik);
        converged = residual <= options.tolerance;
    }

    if (!converged) {
        throw ConvergenceError("maximum-entropy fit did not converge", residual, iteration);
    }

    for (std::size_t c = 0; c < s.x.size(); ++c) model.top_classes_[c].multiplier = s.x[c];
    for (std::size_t d = 0; d < s.y.size(); ++d) model.bottom_classes_[d].multiplier = s.y[d];
    model.tolerance_achieved_ = residual;
    model.iterations_ = iteration;
    return model;
}

}  // namespace echo::bicm
