#ifndef NLPLAN_CRF_CRF_HPP
#define NLPLAN_CRF_CRF_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "nlplan/corpus/types.hpp"

namespace nlplan::crf {

/// A sequence of observation feature sets, one per position. Entries are
/// interned feature ids; -1 marks a feature unseen at training time and is
/// ignored by inference (weight 0).
using FeatureSeq = std::vector<std::vector<int>>;

/// String-to-id dictionary for observation features. Ids are dense and
/// assigned in first-encounter order, so extraction order fixes the model
/// layout deterministically.
class FeatureInterner {
public:
    int intern(const std::string& name);
    int lookup(const std::string& name) const;  // -1 if unknown
    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }

private:
    std::unordered_map<std::string, int> ids_;
    std::vector<std::string> names_;
};

struct TrainingMeta {
    int iterations = 0;
    double final_objective = 0.0;
};

/// Linear-chain CRF with indicator observation features and label-pair
/// transition weights independent of the observations.
struct CrfModel {
    corpus::LabelAlphabet alphabet;
    FeatureInterner features;
    std::vector<double> obs_weights;    // [feature * L + label]
    std::vector<double> trans_weights;  // [prev * L + next]
    double regularization = 1.0;
    TrainingMeta meta;

    std::size_t label_count() const { return alphabet.size(); }
    std::size_t feature_count() const { return features.size(); }

    double obs_weight(int feature, int label) const {
        return obs_weights[static_cast<std::size_t>(feature) * label_count() +
                           static_cast<std::size_t>(label)];
    }
    double trans_weight(int prev, int next) const {
        return trans_weights[static_cast<std::size_t>(prev) * label_count() +
                             static_cast<std::size_t>(next)];
    }
    double trans_weight(const std::string& prev, const std::string& next) const;

    /// Throws ValidationError if any weight is non-finite or sizes disagree.
    void validate() const;
};

struct Decoding {
    std::vector<std::string> labels;
    double log_probability = 0.0;  // exact normalized log P(labels | x)
};

struct TrainingConfig {
    double regularization = 1.0;
    double tolerance = 1e-5;  // relative objective change
    int max_iterations = 200;
    int lbfgs_memory = 7;
};

struct Example {
    FeatureSeq x;
    std::vector<int> y;  // gold label indices
};

/// Trains by minimizing the L2-regularized negative conditional
/// log-likelihood with L-BFGS. `features` is the dictionary produced while
/// extracting `data` and is moved into the model.
CrfModel train(const std::vector<Example>& data, const corpus::LabelAlphabet& alphabet,
               FeatureInterner features, const TrainingConfig& config = {});

/// Max-probability label sequence; ties broken by lowest label index at each
/// backtrace step. log_probability is computed with the forward algorithm.
Decoding viterbi(const CrfModel& model, const FeatureSeq& x);

/// Exact log P(y | x) = score(x, y) - log Z(x).
double sequence_log_prob(const CrfModel& model, const FeatureSeq& x,
                         const std::vector<std::string>& y);
double sequence_log_prob_ids(const CrfModel& model, const FeatureSeq& x,
                             const std::vector<int>& y);

/// Per-position posterior label distributions from forward-backward.
std::vector<std::vector<double>> marginals(const CrfModel& model, const FeatureSeq& x);

/// log Z(x) by log-space forward recursion.
double log_partition(const CrfModel& model, const FeatureSeq& x);

/// Regularized negative log-likelihood and its gradient at an arbitrary
/// weight point (layout: obs weights then transition weights). Used by the
/// trainer and by finite-difference tests.
double objective_and_gradient(const std::vector<double>& weights,
                              const std::vector<Example>& data, std::size_t feature_count,
                              std::size_t label_count, double regularization,
                              std::vector<double>* gradient);

/// Versioned binary model container; round-trips exactly.
void save_model(const CrfModel& model, const std::string& path);
CrfModel load_model(const std::string& path);
std::string serialize_model(const CrfModel& model);
CrfModel deserialize_model(const std::string& bytes, const std::string& origin);

}  // namespace nlplan::crf

#endif
