#include "lincore/data.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lincore/errors.hpp"
#include "lincore/rng.hpp"

namespace lincore {

void validate(const HmmSpec& spec) {
    if (spec.L < 1 || spec.Y < 2 || spec.d < 1 || spec.n < 1) {
        throw DomainError("HmmSpec: need L >= 1, Y >= 2, d >= 1, n >= 1");
    }
    if (!(spec.transition_temperature >= 0.0) || !(spec.emission_scale >= 0.0)) {
        throw DomainError("HmmSpec: temperature and emission scale must be non-negative");
    }
}

namespace {

// count random directions of norm `scale`; Gram-Schmidt when count <= d.
std::vector<double> random_centers(std::size_t count, std::size_t d, double scale, Rng& rng) {
    std::vector<double> c(count * d);
    for (std::size_t k = 0; k < count; ++k) {
        double* v = &c[k * d];
        double norm = 0.0;
        do {
            for (std::size_t i = 0; i < d; ++i) v[i] = rng.normal();
            if (count <= d) {
                for (std::size_t p = 0; p < k; ++p) {
                    const double* u = &c[p * d];
                    double dot = 0.0, uu = 0.0;
                    for (std::size_t i = 0; i < d; ++i) {
                        dot += v[i] * u[i];
                        uu += u[i] * u[i];
                    }
                    for (std::size_t i = 0; i < d; ++i) v[i] -= dot / uu * u[i];
                }
            }
            norm = 0.0;
            for (std::size_t i = 0; i < d; ++i) norm += v[i] * v[i];
            norm = std::sqrt(norm);
        } while (norm < 1e-8);
        for (std::size_t i = 0; i < d; ++i) v[i] *= scale / norm;
    }
    return c;
}

Label draw_categorical(const double* p, std::size_t n, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += p[k];
        if (u < acc) return k;
    }
    return n - 1;
}

SequenceExample draw_sequence(const HmmSpec& spec, const HmmDataset& params, Rng& rng) {
    SequenceExample ex{FeatureSeq(spec.L, spec.d), LabelSeq(spec.L)};
    for (std::size_t j = 0; j < spec.L; ++j) {
        ex.y[j] = j == 0 ? rng.below(spec.Y) : draw_categorical(&params.transition[ex.y[j - 1] * spec.Y], spec.Y, rng);
        auto row = ex.x.row(j);
        const double* c = &params.centers[ex.y[j] * spec.d];
        for (std::size_t i = 0; i < spec.d; ++i) row[i] = c[i] + rng.normal();
    }
    return ex;
}

}  // namespace

HmmDataset generate_hmm_data(const HmmSpec& spec) {
    validate(spec);
    HmmDataset out;
    Rng prng(spec.seed, 0, 0);
    const std::size_t Y = spec.Y;
    out.transition.resize(Y * Y);
    for (std::size_t a = 0; a < Y; ++a) {
        double* row = &out.transition[a * Y];
        for (std::size_t b = 0; b < Y; ++b) row[b] = spec.transition_temperature * prng.normal();
        const double m = *std::max_element(row, row + Y);
        double s = 0.0;
        for (std::size_t b = 0; b < Y; ++b) s += (row[b] = std::exp(row[b] - m));
        for (std::size_t b = 0; b < Y; ++b) row[b] /= s;
    }
    out.centers = random_centers(Y, spec.d, spec.emission_scale, prng);

    out.train.reserve(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        Rng rng(spec.seed, 1, i);
        out.train.push_back(draw_sequence(spec, out, rng));
    }
    out.test.reserve(spec.n_test);
    for (std::size_t i = 0; i < spec.n_test; ++i) {
        Rng rng(spec.seed, 2, i);
        out.test.push_back(draw_sequence(spec, out, rng));
    }
    return out;
}

void validate(const IdnSpec& spec) {
    if (spec.n_train < 1 || spec.d < 1 || spec.n_classes < 2) {
        throw DomainError("IdnSpec: need n_train >= 1, d >= 1, n_classes >= 2");
    }
    if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) {
        std::ostringstream os;
        os << "IdnSpec: noise rate must lie in [0, 1), got " << spec.noise_rate;
        throw DomainError(os.str());
    }
}

namespace {

double mean_flip(const std::vector<double>& dist, double scale) {
    double s = 0.0;
    for (double a : dist) s += 2.0 / (1.0 + std::exp(a / scale));
    return s / static_cast<double>(dist.size());
}

}  // namespace

IdnDataset generate_idn_dataset(const IdnSpec& spec) {
    validate(spec);
    const std::size_t d = spec.d;
    const std::size_t C = spec.n_classes;
    Rng prng(spec.seed, 0, 0);
    IdnDataset out;
    out.d = d;
    out.n_classes = C;
    const auto centers = random_centers(C, d, spec.separation, prng);

    out.confusion.resize(C);
    for (std::size_t a = 0; a < C; ++a) {
        double best = INFINITY;
        for (std::size_t b = 0; b < C; ++b) {
            if (b == a) continue;
            double dist = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double t = centers[a * d + i] - centers[b * d + i];
                dist += t * t;
            }
            if (dist < best) {
                best = dist;
                out.confusion[a] = b;
            }
        }
    }

    auto draw = [&](Rng& rng, std::vector<double>& xs, std::vector<Label>& ys) {
        const Label y = rng.below(C);
        ys.push_back(y);
        for (std::size_t i = 0; i < d; ++i) xs.push_back(centers[y * d + i] + rng.normal());
    };
    for (std::size_t i = 0; i < spec.n_train; ++i) {
        Rng rng(spec.seed, 1, i);
        draw(rng, out.x_train, out.y_clean);
    }
    for (std::size_t i = 0; i < spec.n_test; ++i) {
        Rng rng(spec.seed, 2, i);
        draw(rng, out.x_test, out.y_test);
    }

    std::vector<double> v(d);
    double vn = 0.0;
    for (auto& t : v) {
        t = prng.normal();
        vn += t * t;
    }
    for (auto& t : v) t /= std::sqrt(vn);
    auto project = [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += v[k] * out.x_train[i * d + k];
        return s;
    };
    const double theta = project(prng.below(spec.n_train));
    out.boundary_distance.resize(spec.n_train);
    for (std::size_t i = 0; i < spec.n_train; ++i) out.boundary_distance[i] = std::abs(project(i) - theta);

    out.flip_probability.assign(spec.n_train, 0.0);
    if (spec.noise_rate > 0.0) {
        // mean flip probability increases monotonically with the scale
        double lo = std::log(1e-8), hi = std::log(1e8);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (mean_flip(out.boundary_distance, std::exp(mid)) < spec.noise_rate ? lo : hi) = mid;
        }
        out.flip_scale = std::exp(0.5 * (lo + hi));
        for (std::size_t i = 0; i < spec.n_train; ++i) {
            out.flip_probability[i] = 2.0 / (1.0 + std::exp(out.boundary_distance[i] / out.flip_scale));
        }
    }

    out.y_noisy = out.y_clean;
    out.flipped.assign(spec.n_train, 0);
    std::size_t flips = 0;
    for (std::size_t i = 0; i < spec.n_train; ++i) {
        Rng rng(spec.seed, 3, i);
        if (out.flip_probability[i] > 0.0 && rng.bernoulli(out.flip_probability[i])) {
            out.y_noisy[i] = out.confusion[out.y_clean[i]];
            out.flipped[i] = 1;
            ++flips;
        }
    }
    out.realized_rate = static_cast<double>(flips) / static_cast<double>(spec.n_train);
    return out;
}

}  // namespace lincore
