// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

#include "cvecwe/logreg.hpp"
#include "cvecwe/vectorizer.hpp"

namespace cvecwe {

struct BaselineModel {
    VectorizerModel vectorizer;
    LinearModel classifier;
};

// Binary container:
//   8 bytes  magic "CVECWEM\0"
//   u32 LE   format version (1)
//   u64 LE   header length H
//   H bytes  JSON header: tokenizer config, max_features, terms, idf,
//            class_labels, num_classes, num_features
//   f64 LE   weights, row-major [num_classes x num_features]
//   f64 LE   bias [num_classes]
// Serialization is deterministic: equal models give equal bytes.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const BaselineModel& model);
BaselineModel deserialize_model(std::string_view bytes);

}  // namespace cvecwe
