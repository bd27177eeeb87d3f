#pragma once

#include <string>
#include <vector>

namespace teamvec {

/// A featurized dialogue: dialogue-act tags, quantized polarities, or
/// entrainment-kernel bins, in dialogue order. This is what the embedder
/// consumes.
using TokenSequence = std::vector<std::string>;

/// A token sequence with the identity of the dialogue it came from.
struct TokenDoc {
  std::string id;
  TokenSequence tokens;
};

}  // namespace teamvec
