#include "codicon/harness/params_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace codicon::harness {
namespace {

constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::ofstream& out_;
};

class Reader {
 public:
  Reader(std::ifstream& in, const std::string& path) : in_(in), path_(path) {}
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str(std::size_t n) {
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    check();
    return s;
  }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    if (n > (1ULL << 32)) throw std::runtime_error(path_ + ": implausible vector length");
    std::vector<double> v(n);
    for (auto& x : v) x = f64();
    return v;
  }

 private:
  std::uint64_t le(int n) {
    unsigned char buf[8] = {};
    in_.read(reinterpret_cast<char*>(buf), n);
    check();
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  void check() {
    if (!in_) throw std::runtime_error(path_ + ": truncated params file");
  }
  std::ifstream& in_;
  const std::string& path_;
};

}  // namespace

const Mlp* ParamsBundle::find_net(const std::string& name) const {
  for (const auto& [n, net] : nets) {
    if (n == name) return &net;
  }
  return nullptr;
}

const std::vector<double>* ParamsBundle::find_vector(const std::string& name) const {
  for (const auto& [n, v] : vectors) {
    if (n == name) return &v;
  }
  return nullptr;
}

void save_params(const std::string& path, const ParamsBundle& bundle) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write params file " + path);
  Writer w(out);
  w.bytes(kParamsMagic, sizeof kParamsMagic);
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(bundle.nets.size() + bundle.vectors.size()));
  for (const auto& [name, net] : bundle.nets) {
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u32(static_cast<std::uint32_t>(net.layer_sizes().size()));
    for (std::size_t s : net.layer_sizes()) w.u64(s);
    w.u64(net.parameter_count());
    for (double v : net.params()) w.f64(v);
  }
  for (const auto& [name, vec] : bundle.vectors) {
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name.data(), name.size());
    w.u64(vec.size());
    for (double v : vec) w.f64(v);
  }
  if (!out) throw std::runtime_error("error writing params file " + path);
}

ParamsBundle load_params(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open params file " + path);
  Reader r(in, path);
  if (r.str(sizeof kParamsMagic) != std::string(kParamsMagic, sizeof kParamsMagic)) {
    throw std::runtime_error(path + ": not a params file");
  }
  if (const std::uint32_t version = r.u32(); version != kVersion) {
    throw std::runtime_error(path + ": unsupported params version " + std::to_string(version));
  }
  ParamsBundle bundle;
  const std::uint32_t entries = r.u32();
  for (std::uint32_t e = 0; e < entries; ++e) {
    const std::uint8_t kind = r.u8();
    std::string name = r.str(r.u32());
    if (kind == 0) {
      std::vector<std::size_t> sizes(r.u32());
      for (auto& s : sizes) s = static_cast<std::size_t>(r.u64());
      Mlp net(sizes);
      const std::vector<double> flat = r.doubles();
      if (flat.size() != net.parameter_count()) throw std::runtime_error(path + ": net '" + name + "' size mismatch");
      net.unflatten(flat);
      bundle.nets.emplace_back(std::move(name), std::move(net));
    } else if (kind == 1) {
      bundle.vectors.emplace_back(std::move(name), r.doubles());
    } else {
      throw std::runtime_error(path + ": unknown entry kind " + std::to_string(kind));
    }
  }
  return bundle;
}

bool is_params_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char buf[sizeof kParamsMagic] = {};
  in.read(buf, sizeof buf);
  return in && std::memcmp(buf, kParamsMagic, sizeof buf) == 0;
}

}  // namespace codicon::harness
