#include "nlplan/crf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlplan/common/error.hpp"

namespace nlplan::crf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(const std::vector<double>& v) {
    double m = kNegInf;
    for (double x : v) m = std::max(m, x);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

namespace detail {

// Observation scores for every position: out[i * L + y] = sum of weights of
// the features active at i under label y. Unknown ids (< 0) contribute 0.
void obs_scores(const double* w, const FeatureSeq& x, std::size_t label_count,
                std::vector<double>& out) {
    const std::size_t n = x.size();
    const std::size_t L = label_count;
    out.assign(n * L, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (int f : x[i]) {
            if (f < 0) continue;
            const double* row = w + static_cast<std::size_t>(f) * L;
            double* dst = out.data() + i * L;
            for (std::size_t y = 0; y < L; ++y) dst[y] += row[y];
        }
    }
}

// Log-space forward recursion. alpha[i * L + y] = log sum over prefixes
// ending at position i with label y. Returns log Z.
double forward(const double* trans, const std::vector<double>& obs, std::size_t n,
               std::size_t L, std::vector<double>& alpha) {
    alpha.assign(n * L, kNegInf);
    std::vector<double> acc(L);
    for (std::size_t y = 0; y < L; ++y) alpha[y] = obs[y];
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t p = 0; p < L; ++p) acc[p] = alpha[(i - 1) * L + p] + trans[p * L + y];
            alpha[i * L + y] = log_sum_exp(acc) + obs[i * L + y];
        }
    }
    std::vector<double> last(alpha.end() - static_cast<long>(L), alpha.end());
    return log_sum_exp(last);
}

// Log-space backward recursion. beta[i * L + y] = log sum over suffixes that
// follow position i given label y at i (excluding i's own emission).
void backward(const double* trans, const std::vector<double>& obs, std::size_t n, std::size_t L,
              std::vector<double>& beta) {
    beta.assign(n * L, 0.0);
    std::vector<double> acc(L);
    for (std::size_t i = n - 1; i-- > 0;) {
        for (std::size_t y = 0; y < L; ++y) {
            for (std::size_t q = 0; q < L; ++q)
                acc[q] = trans[y * L + q] + obs[(i + 1) * L + q] + beta[(i + 1) * L + q];
            beta[i * L + y] = log_sum_exp(acc);
        }
    }
}

// Unnormalized log score of a specific path.
double path_score(const double* trans, const std::vector<double>& obs, const std::vector<int>& y,
                  std::size_t L) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += obs[i * L + static_cast<std::size_t>(y[i])];
        if (i > 0)
            s += trans[static_cast<std::size_t>(y[i - 1]) * L + static_cast<std::size_t>(y[i])];
    }
    return s;
}

}  // namespace detail

int FeatureInterner::intern(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    ids_.emplace(name, id);
    names_.push_back(name);
    return id;
}

int FeatureInterner::lookup(const std::string& name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? -1 : it->second;
}

double CrfModel::trans_weight(const std::string& prev, const std::string& next) const {
    int p = alphabet.index_of(prev);
    int q = alphabet.index_of(next);
    if (p < 0 || q < 0)
        throw ValidationError("unknown label in transition lookup: " + prev + " -> " + next);
    return trans_weight(p, q);
}

void CrfModel::validate() const {
    const std::size_t L = label_count();
    if (L == 0) throw ValidationError("model has an empty label alphabet");
    if (obs_weights.size() != feature_count() * L)
        throw ValidationError("model observation weight table has wrong size");
    if (trans_weights.size() != L * L)
        throw ValidationError("model transition weight table has wrong size");
    for (double w : obs_weights)
        if (!std::isfinite(w)) throw ValidationError("model contains a non-finite weight");
    for (double w : trans_weights)
        if (!std::isfinite(w)) throw ValidationError("model contains a non-finite weight");
}

double log_partition(const CrfModel& model, const FeatureSeq& x) {
    if (x.empty()) throw ValidationError("cannot score an empty sequence");
    const std::size_t L = model.label_count();
    std::vector<double> obs, alpha;
    detail::obs_scores(model.obs_weights.data(), x, L, obs);
    return detail::forward(model.trans_weights.data(), obs, x.size(), L, alpha);
}

Decoding viterbi(const CrfModel& model, const FeatureSeq& x) {
    if (x.empty()) throw ValidationError("cannot decode an empty sequence");
    const std::size_t n = x.size();
    const std::size_t L = model.label_count();
    std::vector<double> obs;
    detail::obs_scores(model.obs_weights.data(), x, L, obs);

    std::vector<double> delta(n * L, kNegInf);
    std::vector<int> back(n * L, 0);
    for (std::size_t y = 0; y < L; ++y) delta[y] = obs[y];
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t y = 0; y < L; ++y) {
            double best = kNegInf;
            int arg = 0;
            for (std::size_t p = 0; p < L; ++p) {
                double s = delta[(i - 1) * L + p] + model.trans_weights[p * L + y];
                if (s > best) {  // strict: first (lowest-index) maximizer wins
                    best = s;
                    arg = static_cast<int>(p);
                }
            }
            delta[i * L + y] = best + obs[i * L + y];
            back[i * L + y] = arg;
        }
    }

    double best = kNegInf;
    int arg = 0;
    for (std::size_t y = 0; y < L; ++y) {
        if (delta[(n - 1) * L + y] > best) {
            best = delta[(n - 1) * L + y];
            arg = static_cast<int>(y);
        }
    }
    std::vector<int> path(n);
    path[n - 1] = arg;
    for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i * L + static_cast<std::size_t>(path[i])];

    std::vector<double> alpha;
    double log_z = detail::forward(model.trans_weights.data(), obs, n, L, alpha);

    Decoding out;
    out.labels.reserve(n);
    for (int y : path) out.labels.push_back(model.alphabet.labels[static_cast<std::size_t>(y)]);
    out.log_probability = best - log_z;
    return out;
}

double sequence_log_prob_ids(const CrfModel& model, const FeatureSeq& x, const std::vector<int>& y) {
    if (x.empty()) throw ValidationError("cannot score an empty sequence");
    if (y.size() != x.size())
        throw ValidationError("label sequence length does not match observation length");
    const std::size_t L = model.label_count();
    for (int label : y)
        if (label < 0 || static_cast<std::size_t>(label) >= L)
            throw ValidationError("label index out of range in sequence scoring");
    std::vector<double> obs, alpha;
    detail::obs_scores(model.obs_weights.data(), x, L, obs);
    double log_z = detail::forward(model.trans_weights.data(), obs, x.size(), L, alpha);
    return detail::path_score(model.trans_weights.data(), obs, y, L) - log_z;
}

double sequence_log_prob(const CrfModel& model, const FeatureSeq& x,
                         const std::vector<std::string>& y) {
    std::vector<int> ids;
    ids.reserve(y.size());
    for (const auto& label : y) {
        int id = model.alphabet.index_of(label);
        if (id < 0) throw ValidationError("unknown label in sequence scoring: " + label);
        ids.push_back(id);
    }
    return sequence_log_prob_ids(model, x, ids);
}

std::vector<std::vector<double>> marginals(const CrfModel& model, const FeatureSeq& x) {
    if (x.empty()) throw ValidationError("cannot score an empty sequence");
    const std::size_t n = x.size();
    const std::size_t L = model.label_count();
    std::vector<double> obs, alpha, beta;
    detail::obs_scores(model.obs_weights.data(), x, L, obs);
    double log_z = detail::forward(model.trans_weights.data(), obs, n, L, alpha);
    detail::backward(model.trans_weights.data(), obs, n, L, beta);

    std::vector<std::vector<double>> out(n, std::vector<double>(L, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t y = 0; y < L; ++y)
            out[i][y] = std::exp(alpha[i * L + y] + beta[i * L + y] - log_z);
    return out;
}

double objective_and_gradient(const std::vector<double>& weights, const std::vector<Example>& data,
                              std::size_t feature_count, std::size_t label_count,
                              double regularization, std::vector<double>* gradient) {
    const std::size_t L = label_count;
    const std::size_t obs_size = feature_count * L;
    const std::size_t dim = obs_size + L * L;
    if (weights.size() != dim) throw InternalError("objective called with wrong weight dimension");
    const double* obs_w = weights.data();
    const double* trans_w = weights.data() + obs_size;

    if (gradient) gradient->assign(dim, 0.0);
    double nll = 0.0;

    std::vector<double> obs, alpha, beta, acc(L);
    for (const Example& ex : data) {
        const std::size_t n = ex.x.size();
        if (n == 0 || ex.y.size() != n)
            throw InternalError("training example with mismatched lengths");
        detail::obs_scores(obs_w, ex.x, L, obs);
        double log_z = detail::forward(trans_w, obs, n, L, alpha);
        nll += log_z - detail::path_score(trans_w, obs, ex.y, L);
        if (!gradient) continue;

        detail::backward(trans_w, obs, n, L, beta);
        double* g_obs = gradient->data();
        double* g_trans = gradient->data() + obs_size;

        // E_model[f] - E_data[f]: node marginals drive observation features,
        // edge marginals drive transitions.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t y = 0; y < L; ++y)
                acc[y] = std::exp(alpha[i * L + y] + beta[i * L + y] - log_z);
            for (int f : ex.x[i]) {
                if (f < 0) continue;
                double* row = g_obs + static_cast<std::size_t>(f) * L;
                for (std::size_t y = 0; y < L; ++y) row[y] += acc[y];
            }
            const std::size_t gold = static_cast<std::size_t>(ex.y[i]);
            for (int f : ex.x[i])
                if (f >= 0) g_obs[static_cast<std::size_t>(f) * L + gold] -= 1.0;
        }
        for (std::size_t i = 1; i < n; ++i) {
            for (std::size_t p = 0; p < L; ++p) {
                for (std::size_t q = 0; q < L; ++q) {
                    double lp = alpha[(i - 1) * L + p] + trans_w[p * L + q] + obs[i * L + q] +
                                beta[i * L + q] - log_z;
                    g_trans[p * L + q] += std::exp(lp);
                }
            }
            g_trans[static_cast<std::size_t>(ex.y[i - 1]) * L + static_cast<std::size_t>(ex.y[i])] -=
                1.0;
        }
    }

    double reg_term = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        reg_term += weights[k] * weights[k];
        if (gradient) (*gradient)[k] += regularization * weights[k];
    }
    return nll + 0.5 * regularization * reg_term;
}

}  // namespace nlplan::crf
