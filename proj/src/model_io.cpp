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
#include "selfshap/model_io.h"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace selfshap {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'S', 'E', 'L', 'F', 'S', 'H', 'A', 'P'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t fnv1a64(const unsigned char* data, std::size_t len, std::uint64_t hash) {
  for (std::size_t i = 0; i < len; ++i) {
    hash ^= data[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

struct HashedWriter {
  std::ofstream out;
  std::uint64_t hash = kFnvOffset;

  void write(const void* data, std::size_t len) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    hash = fnv1a64(static_cast<const unsigned char*>(data), len, hash);
  }
  template <typename T>
  void write_pod(T v) {
    write(&v, sizeof(T));
  }
};

struct HashedReader {
  std::ifstream in;
  std::uint64_t hash = kFnvOffset;

  void read(void* data, std::size_t len) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(in.gcount()) != len) {
      throw std::runtime_error("model file truncated");
    }
    hash = fnv1a64(static_cast<const unsigned char*>(data), len, hash);
  }
  template <typename T>
  T read_pod() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
};

json spec_to_json(const NetworkSpec& s) {
  return json{{"backbone", to_string(s.backbone)},
              {"n_features", s.n_features},
              {"n_outputs", s.n_outputs},
              {"hidden", s.hidden},
              {"link", to_string(s.link)},
              {"relaxed", s.relaxed},
              {"spline_degree", s.spline_degree},
              {"grid_size", s.grid_size},
              {"grid_low", s.grid_low},
              {"grid_high", s.grid_high},
              {"rbf_centers", s.rbf_centers},
              {"rbf_low", s.rbf_low},
              {"rbf_high", s.rbf_high}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.backbone = backbone_from_string(j.at("backbone").get<std::string>());
  s.n_features = j.at("n_features").get<std::size_t>();
  s.n_outputs = j.at("n_outputs").get<std::size_t>();
  s.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  s.link = link_from_string(j.at("link").get<std::string>());
  s.relaxed = j.at("relaxed").get<bool>();
  s.spline_degree = j.at("spline_degree").get<std::size_t>();
  s.grid_size = j.at("grid_size").get<std::size_t>();
  s.grid_low = j.at("grid_low").get<double>();
  s.grid_high = j.at("grid_high").get<double>();
  s.rbf_centers = j.at("rbf_centers").get<std::size_t>();
  s.rbf_low = j.at("rbf_low").get<double>();
  s.rbf_high = j.at("rbf_high").get<double>();
  return s;
}

/// Every persistent array of the model, in a fixed order.
std::vector<ParamView> collect_arrays(ShapNetwork& net) {
  std::vector<ParamView> arrays = net.param_views();
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    for (auto& v : net.layer(i).state()) {
      arrays.push_back({"L" + std::to_string(i) + ".state." + v.name, v.data, v.size});
    }
  }
  return arrays;
}

}  // namespace

void save_model(const std::string& path, ShapNetwork& net, const Preprocessor& prep,
                const LabelCodec& labels) {
  json header;
  header["format_version"] = kFormatVersion;
  header["spec"] = spec_to_json(net.spec());

  json prep_cols = json::array();
  std::vector<double> prep_mean, prep_std;
  for (const auto& col : prep.columns()) {
    json jc;
    jc["name"] = col.name;
    jc["kind"] = col.kind == ColumnKind::kCategorical ? "categorical" : "numeric";
    jc["constant"] = col.constant;
    json toks = json::object();
    for (const auto& [cat, tok] : col.tokens) toks[cat] = static_cast<std::int64_t>(tok);
    jc["tokens"] = toks;
    prep_cols.push_back(jc);
    prep_mean.push_back(col.mean);
    prep_std.push_back(col.stdev);
  }
  header["preprocessor"] = {{"columns", prep_cols}};
  header["labels"] = {{"task", to_string(labels.task)}, {"classes", labels.classes}};

  auto arrays = collect_arrays(net);
  json arr_meta = json::array();
  for (const auto& a : arrays) arr_meta.push_back({{"name", a.name}, {"size", a.size}});
  arr_meta.push_back({{"name", "prep.mean"}, {"size", prep_mean.size()}});
  arr_meta.push_back({{"name", "prep.std"}, {"size", prep_std.size()}});
  header["arrays"] = arr_meta;

  std::string header_str = header.dump();

  HashedWriter w;
  w.out.open(path, std::ios::binary | std::ios::trunc);
  if (!w.out) throw std::runtime_error("save_model: cannot open " + path);
  w.write(kMagic, sizeof(kMagic));
  w.write_pod<std::uint32_t>(kFormatVersion);
  w.write_pod<std::uint64_t>(header_str.size());
  w.write(header_str.data(), header_str.size());
  for (const auto& a : arrays) {
    w.write_pod<std::uint64_t>(a.size * sizeof(double));
    w.write(a.data, a.size * sizeof(double));
  }
  w.write_pod<std::uint64_t>(prep_mean.size() * sizeof(double));
  w.write(prep_mean.data(), prep_mean.size() * sizeof(double));
  w.write_pod<std::uint64_t>(prep_std.size() * sizeof(double));
  w.write(prep_std.data(), prep_std.size() * sizeof(double));
  std::uint64_t checksum = w.hash;
  w.out.write(reinterpret_cast<const char*>(&checksum), sizeof(checksum));
  if (!w.out) throw std::runtime_error("save_model: write failed for " + path);
}

ModelBundle load_model(const std::string& path) {
  HashedReader r;
  r.in.open(path, std::ios::binary);
  if (!r.in) throw std::runtime_error("load_model: cannot open " + path);

  char magic[8];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_model: not a model container (bad magic)");
  }
  auto version = r.read_pod<std::uint32_t>();
  if (version != kFormatVersion) {
    throw std::runtime_error("load_model: format version " + std::to_string(version) +
                             ", this build reads version " + std::to_string(kFormatVersion));
  }
  auto header_len = r.read_pod<std::uint64_t>();
  std::string header_str(header_len, '\0');
  r.read(header_str.data(), header_len);
  json header = json::parse(header_str);

  ModelBundle bundle;
  NetworkSpec spec = spec_from_json(header.at("spec"));
  Rng rng(0);
  bundle.net = ShapNetwork::build(spec, rng);

  auto arrays = collect_arrays(bundle.net);
  std::vector<double> prep_mean, prep_std;
  for (const auto& meta : header.at("arrays")) {
    std::string name = meta.at("name").get<std::string>();
    auto size = meta.at("size").get<std::size_t>();
    auto byte_len = r.read_pod<std::uint64_t>();
    if (byte_len != size * sizeof(double)) {
      throw std::runtime_error("load_model: array '" + name + "' length mismatch");
    }
    if (name == "prep.mean" || name == "prep.std") {
      auto& dst = name == "prep.mean" ? prep_mean : prep_std;
      dst.resize(size);
      r.read(dst.data(), byte_len);
      continue;
    }
    auto it = std::find_if(arrays.begin(), arrays.end(),
                           [&](const ParamView& v) { return v.name == name; });
    if (it == arrays.end() || it->size != size) {
      throw std::runtime_error("load_model: unexpected array '" + name + "'");
    }
    r.read(it->data, byte_len);
  }

  std::uint64_t expected = r.hash;
  std::uint64_t stored;
  r.in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (static_cast<std::size_t>(r.in.gcount()) != sizeof(stored) || stored != expected) {
    throw std::runtime_error("load_model: checksum mismatch (file truncated or corrupted)");
  }

  const json& jp = header.at("preprocessor").at("columns");
  auto& cols = bundle.prep.mutable_columns();
  cols.resize(jp.size());
  for (std::size_t f = 0; f < jp.size(); ++f) {
    const json& jc = jp[f];
    cols[f].name = jc.at("name").get<std::string>();
    cols[f].kind = jc.at("kind").get<std::string>() == "categorical" ? ColumnKind::kCategorical
                                                                     : ColumnKind::kNumeric;
    cols[f].constant = jc.at("constant").get<bool>();
    for (auto it = jc.at("tokens").begin(); it != jc.at("tokens").end(); ++it) {
      cols[f].tokens[it.key()] = static_cast<double>(it.value().get<std::int64_t>());
    }
    cols[f].mean = prep_mean.at(f);
    cols[f].stdev = prep_std.at(f);
  }

  bundle.labels.task = task_from_string(header.at("labels").at("task").get<std::string>());
  bundle.labels.classes = header.at("labels").at("classes").get<std::vector<std::string>>();
  return bundle;
}

}  // namespace selfshap
