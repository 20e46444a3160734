#include <cstdint>
#include <cstring>

#include "nlplan/common/error.hpp"
#include "nlplan/common/text.hpp"
#include "nlplan/crf/crf.hpp"

namespace nlplan::crf {

namespace {

constexpr char kMagic[] = "NLPLANCRF";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;
constexpr std::uint32_t kVersion = 1;

// Little-endian encoding regardless of host, so model files are portable
// byte-for-byte.
void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class Cursor {
public:
    Cursor(const std::string& bytes, std::string origin)
        : bytes_(bytes), origin_(std::move(origin)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += 4;
        return v;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
                    << (8 * i);
        pos_ += 8;
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::string str() {
        std::uint32_t len = u32();
        need(len);
        std::string s = bytes_.substr(pos_, len);
        pos_ += len;
        return s;
    }

    void expect_magic() {
        need(kMagicLen);
        if (bytes_.compare(0, kMagicLen, kMagic) != 0)
            throw ValidationError(origin_ + ": not a model file (bad magic)");
        pos_ += kMagicLen;
    }

    void expect_end() const {
        if (pos_ != bytes_.size())
            throw ValidationError(origin_ + ": trailing bytes after model payload");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw ValidationError(origin_ + ": truncated model file");
    }

    const std::string& bytes_;
    std::string origin_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const CrfModel& model) {
    model.validate();
    std::string out;
    out.append(kMagic);
    put_u32(out, kVersion);

    put_u32(out, static_cast<std::uint32_t>(model.alphabet.labels.size()));
    for (const auto& label : model.alphabet.labels) put_string(out, label);
    put_string(out, model.alphabet.outside_label);

    put_u32(out, static_cast<std::uint32_t>(model.features.size()));
    for (const auto& name : model.features.names()) put_string(out, name);

    put_f64(out, model.regularization);
    put_u32(out, static_cast<std::uint32_t>(model.meta.iterations));
    put_f64(out, model.meta.final_objective);

    for (double w : model.obs_weights) put_f64(out, w);
    for (double w : model.trans_weights) put_f64(out, w);
    return out;
}

CrfModel deserialize_model(const std::string& bytes, const std::string& origin) {
    Cursor cur(bytes, origin);
    cur.expect_magic();
    std::uint32_t version = cur.u32();
    if (version != kVersion)
        throw ValidationError(origin + ": unsupported model version " + std::to_string(version));

    CrfModel model;
    std::uint32_t label_count = cur.u32();
    model.alphabet.labels.reserve(label_count);
    for (std::uint32_t i = 0; i < label_count; ++i) model.alphabet.labels.push_back(cur.str());
    model.alphabet.outside_label = cur.str();

    std::uint32_t feature_count = cur.u32();
    for (std::uint32_t i = 0; i < feature_count; ++i) model.features.intern(cur.str());
    if (model.features.size() != feature_count)
        throw ValidationError(origin + ": duplicate feature names in model file");

    model.regularization = cur.f64();
    model.meta.iterations = static_cast<int>(cur.u32());
    model.meta.final_objective = cur.f64();

    const std::size_t L = label_count;
    model.obs_weights.resize(static_cast<std::size_t>(feature_count) * L);
    for (double& w : model.obs_weights) w = cur.f64();
    model.trans_weights.resize(L * L);
    for (double& w : model.trans_weights) w = cur.f64();
    cur.expect_end();
    model.validate();
    return model;
}

void save_model(const CrfModel& model, const std::string& path) {
    write_file(path, serialize_model(model));
}

CrfModel load_model(const std::string& path) {
    return deserialize_model(read_file(path), path);
}

}  // namespace nlplan::crf
