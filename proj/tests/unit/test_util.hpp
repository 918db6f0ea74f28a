#pragma once

#include <random>
#include <vector>

#include "lincore/structured.hpp"

namespace testutil {

inline lincore::ChainModel random_model(std::mt19937_64& gen, std::size_t Y, std::size_t d, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    std::vector<double> w(Y * d + Y * Y);
    for (auto& v : w) v = nd(gen);
    return lincore::ChainModel(Y, d, std::move(w));
}

inline lincore::FeatureSeq random_x(std::mt19937_64& gen, std::size_t L, std::size_t d) {
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> x(L * d);
    for (auto& v : x) v = nd(gen);
    return lincore::FeatureSeq(L, d, std::move(x));
}

inline lincore::LabelSeq random_y(std::mt19937_64& gen, std::size_t L, std::size_t Y) {
    std::uniform_int_distribution<std::size_t> u(0, Y - 1);
    lincore::LabelSeq y(L);
    for (auto& v : y) v = u(gen);
    return y;
}

// All Y^L sequences by counting, independent of the library enumerator.
inline std::vector<lincore::LabelSeq> all_sequences(std::size_t Y, std::size_t L) {
    std::vector<lincore::LabelSeq> out;
    lincore::LabelSeq y(L, 0);
    while (true) {
        out.push_back(y);
        std::size_t j = L;
        while (j > 0) {
            --j;
            if (++y[j] < Y) break;
            y[j] = 0;
            if (j == 0) return out;
        }
        if (L == 0) return out;
    }
}

// Score computed straight from the definition.
inline double score_by_hand(const lincore::ChainModel& m, const lincore::FeatureSeq& x, const lincore::LabelSeq& y) {
    double s = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
        for (std::size_t i = 0; i < x.dim(); ++i) s += m.unary(y[j])[i] * x.row(j)[i];
        if (j > 0) s += m.transition(y[j - 1], y[j]);
    }
    return s;
}

template <typename F>
std::vector<double> weight_fd(const lincore::ChainModel& model, F f, double h = 1e-6) {
    lincore::ChainModel m = model;
    std::vector<double> g(m.num_weights());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = m.weights()[i];
        m.weights()[i] = v + h;
        const double up = f(m);
        m.weights()[i] = v - h;
        const double dn = f(m);
        m.weights()[i] = v;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

}  // namespace testutil
