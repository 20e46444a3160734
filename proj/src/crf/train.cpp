#include <cmath>
#include <deque>
#include <numeric>

#include "nlplan/common/error.hpp"
#include "nlplan/crf/crf.hpp"

namespace nlplan::crf {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Limited-memory BFGS direction via the standard two-loop recursion over the
// stored (s, y) displacement pairs; falls back to steepest descent while the
// history is empty.
void lbfgs_direction(const std::deque<std::vector<double>>& s_hist,
                     const std::deque<std::vector<double>>& y_hist,
                     const std::vector<double>& grad, std::vector<double>& dir) {
    dir = grad;
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m), rho(m);
    for (std::size_t k = 0; k < m; ++k) rho[k] = 1.0 / dot(y_hist[k], s_hist[k]);
    for (std::size_t k = m; k-- > 0;) {
        alpha[k] = rho[k] * dot(s_hist[k], dir);
        for (std::size_t j = 0; j < dir.size(); ++j) dir[j] -= alpha[k] * y_hist[k][j];
    }
    if (m > 0) {
        double scale = dot(s_hist[m - 1], y_hist[m - 1]) / dot(y_hist[m - 1], y_hist[m - 1]);
        for (double& d : dir) d *= scale;
    }
    for (std::size_t k = 0; k < m; ++k) {
        double beta = rho[k] * dot(y_hist[k], dir);
        for (std::size_t j = 0; j < dir.size(); ++j) dir[j] += (alpha[k] - beta) * s_hist[k][j];
    }
    for (double& d : dir) d = -d;
}

}  // namespace

CrfModel train(const std::vector<Example>& data, const corpus::LabelAlphabet& alphabet,
               FeatureInterner features, const TrainingConfig& config) {
    alphabet.validate();
    if (data.empty()) throw ValidationError("cannot train on an empty example set");
    const std::size_t L = alphabet.size();
    const std::size_t F = features.size();
    for (const Example& ex : data) {
        if (ex.x.empty() || ex.x.size() != ex.y.size())
            throw ValidationError("training example with empty or mismatched sequences");
        for (int y : ex.y)
            if (y < 0 || static_cast<std::size_t>(y) >= L)
                throw ValidationError("training example labels an index outside the alphabet");
        for (const auto& feats : ex.x)
            for (int f : feats)
                if (f < 0 || static_cast<std::size_t>(f) >= F)
                    throw ValidationError("training example references an unknown feature id");
    }

    const std::size_t dim = F * L + L * L;
    std::vector<double> w(dim, 0.0), grad, trial(dim), trial_grad, dir;
    double obj = objective_and_gradient(w, data, F, L, config.regularization, &grad);

    std::deque<std::vector<double>> s_hist, y_hist;
    int iterations = 0;
    for (int it = 0; it < config.max_iterations; ++it) {
        lbfgs_direction(s_hist, y_hist, grad, dir);
        double slope = dot(grad, dir);
        if (slope >= 0.0) {  // not a descent direction; reset to steepest descent
            s_hist.clear();
            y_hist.clear();
            for (std::size_t j = 0; j < dim; ++j) dir[j] = -grad[j];
            slope = dot(grad, dir);
            if (slope >= 0.0) break;  // gradient is exactly zero
        }

        // Backtracking line search with the Armijo sufficient-decrease test.
        constexpr double c1 = 1e-4;
        double step = 1.0;
        double next_obj = obj;
        bool accepted = false;
        for (int half = 0; half < 50; ++half) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = w[j] + step * dir[j];
            next_obj =
                objective_and_gradient(trial, data, F, L, config.regularization, &trial_grad);
            if (std::isfinite(next_obj) && next_obj <= obj + c1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no further progress possible at double precision

        std::vector<double> s(dim), yv(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            s[j] = trial[j] - w[j];
            yv[j] = trial_grad[j] - grad[j];
        }
        if (dot(s, yv) > 1e-12) {  // keep the curvature pairs positive definite
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(yv));
            if (static_cast<int>(s_hist.size()) > config.lbfgs_memory) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }

        double prev_obj = obj;
        w.swap(trial);
        grad.swap(trial_grad);
        obj = next_obj;
        iterations = it + 1;
        if (!std::isfinite(obj))
            throw InternalError("training objective became non-finite at iteration " +
                                std::to_string(iterations));
        if (std::abs(prev_obj - obj) / std::max(1.0, std::abs(prev_obj)) < config.tolerance) break;
    }

    CrfModel model;
    model.alphabet = alphabet;
    model.features = std::move(features);
    model.obs_weights.assign(w.begin(), w.begin() + static_cast<long>(F * L));
    model.trans_weights.assign(w.begin() + static_cast<long>(F * L), w.end());
    model.regularization = config.regularization;
    model.meta.iterations = iterations;
    model.meta.final_objective = obj;
    model.validate();
    return model;
}

}  // namespace nlplan::crf
