#pragma once

#include <string>
#include <utility>
#include <vector>

#include "codicon/gradkit/mlp.hpp"

namespace codicon::harness {

// Named nets and plain vectors stored in one file.
//
// Binary layout, little-endian throughout:
//   magic "CDCNPRMS" | u32 version (1) | u32 entry count
//   per entry: u8 kind (0 = net, 1 = vector) | u32 name length | name bytes
//     net:    u32 layer count | u64 layer sizes... | u64 n | n x f64
//     vector: u64 n | n x f64
struct ParamsBundle {
  std::vector<std::pair<std::string, Mlp>> nets;
  std::vector<std::pair<std::string, std::vector<double>>> vectors;

  const Mlp* find_net(const std::string& name) const;
  const std::vector<double>* find_vector(const std::string& name) const;
};

inline constexpr char kParamsMagic[8] = {'C', 'D', 'C', 'N', 'P', 'R', 'M', 'S'};

void save_params(const std::string& path, const ParamsBundle& bundle);
ParamsBundle load_params(const std::string& path);

// True when the file starts with the params magic.
bool is_params_file(const std::string& path);

}  // namespace codicon::harness
