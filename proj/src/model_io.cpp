// SPDX-License-Identifier: Apache-2.0

#include "cvecwe/model_io.hpp"

#include <bit>
#include <cstring>
#include <nlohmann/json.hpp>

#include "cvecwe/errors.hpp"

namespace cvecwe {

namespace {

constexpr char kMagic[8] = {'C', 'V', 'E', 'C', 'W', 'E', 'M', '\0'};

template <typename T>
void put_le(std::string& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double value) { put_le(out, std::bit_cast<std::uint64_t>(value)); }

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    template <typename T>
    T get_le() {
        need(sizeof(T));
        T value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return value;
    }

    double get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

    std::string_view take(std::size_t n) {
        need(n);
        auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw ParseError("truncated model file", 0, pos_);
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_model(const BaselineModel& model) {
    const auto& vec = model.vectorizer;
    const auto& clf = model.classifier;
    clf.check_invariants();
    if (clf.num_features != vec.num_features()) throw ValidationError("classifier and vectorizer feature counts differ");

    nlohmann::ordered_json header;
    header["tokenizer"] = {{"lowercase", vec.tokenizer().lowercase},
                           {"ngram_min", vec.tokenizer().ngram_min},
                           {"ngram_max", vec.tokenizer().ngram_max},
                           {"min_token_length", vec.tokenizer().min_token_length}};
    header["max_features"] = vec.max_features();
    header["terms"] = vec.terms();
    // Doubles survive the JSON round trip exactly (shortest round-trip form).
    header["idf"] = vec.idf();
    nlohmann::ordered_json labels = nlohmann::ordered_json::array();
    for (CweId id : clf.class_labels) labels.push_back(id.str());
    header["class_labels"] = std::move(labels);
    header["num_classes"] = clf.num_classes();
    header["num_features"] = clf.num_features;
    const std::string header_text = header.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);

    std::string out(kMagic, sizeof kMagic);
    put_le(out, kModelFormatVersion);
    put_le(out, static_cast<std::uint64_t>(header_text.size()));
    out += header_text;
    out.reserve(out.size() + 8 * (clf.weights.size() + clf.bias.size()));
    for (double w : clf.weights) put_f64(out, w);
    for (double b : clf.bias) put_f64(out, b);
    return out;
}

BaselineModel deserialize_model(std::string_view bytes) {
    Reader in(bytes);
    if (std::memcmp(in.take(sizeof kMagic).data(), kMagic, sizeof kMagic) != 0) {
        throw ParseError("not a model file (bad magic)", 0, 0);
    }
    const auto version = in.get_le<std::uint32_t>();
    if (version != kModelFormatVersion) {
        throw ParseError("unsupported model format version " + std::to_string(version), 0, 8);
    }
    const auto header_len = in.get_le<std::uint64_t>();
    nlohmann::json header;
    try {
        const auto text = in.take(static_cast<std::size_t>(header_len));
        header = nlohmann::json::parse(text.begin(), text.end());

        TokenizerConfig tok;
        tok.lowercase = header.at("tokenizer").at("lowercase").get<bool>();
        tok.ngram_min = header.at("tokenizer").at("ngram_min").get<int>();
        tok.ngram_max = header.at("tokenizer").at("ngram_max").get<int>();
        tok.min_token_length = header.at("tokenizer").at("min_token_length").get<std::size_t>();

        BaselineModel model;
        model.vectorizer = VectorizerModel(tok, header.at("max_features").get<std::size_t>(),
                                           header.at("terms").get<std::vector<std::string>>(),
                                           header.at("idf").get<std::vector<double>>());
        std::vector<CweId> labels;
        for (const auto& s : header.at("class_labels")) labels.push_back(CweId::from_string(s.get<std::string>()));
        const auto classes = header.at("num_classes").get<std::size_t>();
        const auto features = header.at("num_features").get<std::size_t>();
        if (classes != labels.size() || features != model.vectorizer.num_features()) {
            throw ParseError("model header dimensions are inconsistent", 0, 20);
        }
        model.classifier = LinearModel(std::move(labels), features);
        for (double& w : model.classifier.weights) w = in.get_f64();
        for (double& b : model.classifier.bias) b = in.get_f64();
        if (!in.at_end()) throw ParseError("trailing bytes after model payload", 0, bytes.size());
        model.classifier.check_invariants();
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad model header: ") + e.what(), 0, 20);
    }
}

}  // namespace cvecwe
