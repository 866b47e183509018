/*******************************************************************************
 * Copyright (c) 2026 The nvsim Authors.                                       *
 * All rights reserved.                                                        *
 *                                                                             *
 * This source code and the accompanying materials are made available under    *
 * the terms of the Apache License 2.0 which accompanies this distribution.    *
 ******************************************************************************/
#include <stdexcept>

#include <json.hpp>
#include <openssl/evp.h>

#include "nvsim/app.hpp"

namespace nvsim::app {

std::string sha256_hex(const std::string &bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                 nullptr) != 1)
    throw std::runtime_error("sha256: digest failed");
  static const char *hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string manifest_json(const ManifestInput &in) {
  nlohmann::ordered_json j;
  j["spec"] = {{"name", in.spec.name},
               {"config", in.spec.config_path.empty() ? default_config_path()
                                                      : in.spec.config_path},
               {"out", in.spec.out_dir},
               {"threads", in.spec.threads}};
  if (in.spec.seed)
    j["spec"]["seed"] = *in.spec.seed;
  if (in.spec.trajectories)
    j["spec"]["trajectories"] = *in.spec.trajectories;
  j["version"] = NVSIM_VERSION_STRING;
  j["started_utc"] = in.started_utc;
  j["wall_clock_s"] = in.wall_clock_s;
  j["seed"] = in.seed;
  j["trajectories"] = in.trajectories;
  nlohmann::ordered_json outs = nlohmann::ordered_json::array();
  for (const auto &f : in.outputs)
    outs.push_back({{"file", f.name},
                    {"bytes", f.content.size()},
                    {"sha256", sha256_hex(f.content)}});
  j["outputs"] = outs;
  return j.dump(2) + "\n";
}

} // namespace nvsim::app
