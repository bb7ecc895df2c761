/*
 * Copyright 2026 The SelfSHAP Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <string>

#include "selfshap/data.h"
#include "selfshap/network.h"

namespace selfshap {

struct ModelBundle {
  ShapNetwork net;
  Preprocessor prep;
  LabelCodec labels;
};

/// Container layout: magic "SELFSHAP", u32 format version, u64 header length,
/// JSON header, then one length-prefixed raw little-endian f64 blob per named
/// array (layer parameters, running statistics, preprocessing statistics,
/// bias), and a trailing FNV-1a 64 checksum over everything before it.
/// The round trip is bit-exact: save(load(f)) reproduces f byte for byte.
void save_model(const std::string& path, ShapNetwork& net, const Preprocessor& prep,
                const LabelCodec& labels);

/// Throws on magic/version mismatch (naming both versions) and on checksum
/// failure (truncated or corrupted files).
ModelBundle load_model(const std::string& path);

}  // namespace selfshap
