#include "lincore/multiclass.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lincore/consistency.hpp"
#include "lincore/errors.hpp"

namespace lincore {

ScoreTable::ScoreTable(std::vector<double> scores) : scores_(std::move(scores)) {
    if (scores_.size() < 2) {
        throw DomainError("ScoreTable: need at least two labels");
    }
    for (double s : scores_) {
        if (!std::isfinite(s)) {
            throw DomainError("ScoreTable: non-finite score");
        }
    }
}

Label ScoreTable::argmax() const { return argmax_lowest(scores_); }

CategoricalDistribution::CategoricalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {
    double total = 0.0;
    for (double p : probs_) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw DomainError("CategoricalDistribution: negative or non-finite probability");
        }
        total += p;
    }
    if (probs_.empty() || std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "CategoricalDistribution: probabilities sum to " << total;
        throw DomainError(os.str());
    }
}

Label argmax_lowest(std::span<const double> v) {
    Label best = 0;
    for (Label i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) {
            best = i;
        }
    }
    return best;
}

namespace {

void check_label(const ScoreTable& scores, Label y) {
    if (y >= scores.size()) {
        std::ostringstream os;
        os << "label " << y << " out of range for " << scores.size() << " classes";
        throw DomainError(os.str());
    }
}

}  // namespace

double mc_sum_loss(const LinearCoreSpec& spec, const ScoreTable& scores, Label y) {
    check_label(scores, y);
    double total = 0.0;
    for (Label k = 0; k < scores.size(); ++k) {
        if (k != y) {
            total += lc_value(spec, scores[y] - scores[k]);
        }
    }
    return total;
}

std::vector<double> mc_sum_loss_gradient(const LinearCoreSpec& spec, const ScoreTable& scores, Label y) {
    check_label(scores, y);
    std::vector<double> g(scores.size(), 0.0);
    for (Label k = 0; k < scores.size(); ++k) {
        if (k == y) continue;
        const double d = lc_derivative(spec, scores[y] - scores[k]);
        g[y] += d;
        g[k] -= d;
    }
    return g;
}

std::vector<double> mc_pair_gradient_magnitudes(const LinearCoreSpec& spec, const ScoreTable& scores,
                                                Label y) {
    check_label(scores, y);
    std::vector<double> out;
    out.reserve(scores.size() - 1);
    for (Label k = 0; k < scores.size(); ++k) {
        if (k != y) {
            out.push_back(std::abs(lc_derivative(spec, scores[y] - scores[k])));
        }
    }
    return out;
}

ConditionalRegrets mc_conditional_regrets(const LinearCoreSpec& spec, const CategoricalDistribution& p,
                                          const ScoreTable& scores) {
    const std::size_t n = scores.size();
    if (n > kMaxRegretLabels) {
        std::ostringstream os;
        os << "mc_conditional_regrets: n = " << n << " exceeds brute-force limit " << kMaxRegretLabels;
        throw UnsupportedError(os.str());
    }
    if (p.size() != n) {
        throw DomainError("mc_conditional_regrets: distribution and score sizes differ");
    }
    ConditionalRegrets r;
    const double pmax = *std::max_element(p.values().begin(), p.values().end());
    r.regret_target = pmax - p[scores.argmax()];

    double conditional = 0.0;
    for (Label y = 0; y < n; ++y) {
        if (p[y] > 0.0) {
            conditional += p[y] * mc_sum_loss(spec, scores, y);
        }
    }
    double best = 0.0;
    for (Label a = 0; a < n; ++a) {
        for (Label b = a + 1; b < n; ++b) {
            best += pair_infimum(spec, p[a], p[b]);
        }
    }
    r.regret_surrogate = conditional - best;
    return r;
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) {
        s += std::exp(x - m);
    }
    return m + std::log(s);
}

std::vector<double> softmax(std::span<const double> scores) {
    const double lse = log_sum_exp(scores);
    std::vector<double> p(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        p[i] = std::exp(scores[i] - lse);
    }
    return p;
}

double ce_loss(const ScoreTable& scores, Label y) {
    check_label(scores, y);
    return log_sum_exp(scores.values()) - scores[y];
}

std::vector<double> ce_gradient(const ScoreTable& scores, Label y) {
    check_label(scores, y);
    std::vector<double> g = softmax(scores.values());
    g[y] -= 1.0;
    return g;
}

namespace {

void check_q(double q) {
    if (!(q > 0.0 && q <= 1.0)) {
        std::ostringstream os;
        os << "GCE exponent q must lie in (0, 1], got " << q;
        throw DomainError(os.str());
    }
}

}  // namespace

double gce_loss(const ScoreTable& scores, Label y, double q) {
    check_label(scores, y);
    check_q(q);
    // p_y^q = exp(q log p_y) keeps tiny probabilities accurate.
    const double log_py = scores[y] - log_sum_exp(scores.values());
    return -std::expm1(q * log_py) / q;
}

std::vector<double> gce_gradient(const ScoreTable& scores, Label y, double q) {
    check_label(scores, y);
    check_q(q);
    std::vector<double> p = softmax(scores.values());
    const double log_py = scores[y] - log_sum_exp(scores.values());
    const double pyq = std::exp(q * log_py);
    // d/ds_k (1 - p_y^q)/q = -p_y^q (1{k=y} - p_k)
    std::vector<double> g(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        g[k] = -pyq * ((k == y ? 1.0 : 0.0) - p[k]);
    }
    return g;
}

}  // namespace lincore
