#pragma once

#include <string>

#include "paraqa/encoder.hpp"
#include "paraqa/tensor.hpp"

namespace paraqa {

struct Checkpoint {
    EncoderConfig encoder;
    ParamSet params;
};

/// Flat binary container: magic, little-endian u64 header length, JSON header
/// (encoder config + tensor name/offset/shape table), then raw little-endian
/// 64-bit floats in table order.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace paraqa
