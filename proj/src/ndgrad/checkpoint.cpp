#include "tcs/ndgrad/checkpoint.hpp"

#include "tcs/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace tcs::ndgrad {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written in host order");

constexpr std::array<char, 8> kMagic = {'T', 'C', 'S', 'C', 'K', 'P', 'T', '\0'};

template <class T> void write_pod(std::ostream &os, const T &v) {
  os.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <class T> T read_pod(std::istream &is, const std::string &path) {
  T v{};
  if (!is.read(reinterpret_cast<char *>(&v), sizeof(T)))
    throw IoError("truncated checkpoint: " + path);
  return v;
}

} // namespace

void save_checkpoint(const std::filesystem::path &path,
                     const nlohmann::json &meta,
                     const std::vector<const Parameter *> &params) {
  nlohmann::json header;
  header["version"] = kCheckpointVersion;
  header["meta"] = meta;
  header["tensors"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const Parameter *p : params) {
    header["tensors"].push_back({{"name", p->name},
                                 {"rows", p->value.rows()},
                                 {"cols", p->value.cols()},
                                 {"offset", offset}});
    offset += static_cast<std::uint64_t>(p->value.size());
  }
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw IoError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic.data(), kMagic.size());
  write_pod(os, kCheckpointVersion);
  write_pod(os, static_cast<std::uint64_t>(text.size()));
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const Parameter *p : params)
    for (Eigen::Index r = 0; r < p->value.rows(); ++r)
      for (Eigen::Index c = 0; c < p->value.cols(); ++c)
        write_pod(os, p->value(r, c));
  if (!os)
    throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  const std::string where = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw IoError("cannot open checkpoint: " + where);
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw IoError("not a checkpoint file: " + where);
  const auto version = read_pod<std::uint32_t>(is, where);
  if (version != kCheckpointVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) +
                  ": " + where);
  const auto len = read_pod<std::uint64_t>(is, where);
  std::string text(len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(len)))
    throw IoError("truncated checkpoint header: " + where);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw IoError("corrupt checkpoint header in " + where + ": " + e.what());
  }
  Checkpoint ckpt;
  ckpt.meta = header.value("meta", nlohmann::json::object());
  for (const auto &t : header.at("tensors")) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        m(r, c) = read_pod<double>(is, where);
    ckpt.tensors.emplace(t.at("name").get<std::string>(), std::move(m));
  }
  return ckpt;
}

void restore_parameters(const Checkpoint &ckpt,
                        const std::vector<Parameter *> &params) {
  for (Parameter *p : params) {
    auto it = ckpt.tensors.find(p->name);
    if (it == ckpt.tensors.end())
      throw StructuralError("checkpoint has no tensor '" + p->name + "'");
    if (it->second.rows() != p->value.rows() ||
        it->second.cols() != p->value.cols())
      throw StructuralError("checkpoint tensor '" + p->name +
                            "' has the wrong shape");
    p->value = it->second;
    p->zero_grad();
  }
}

} // namespace tcs::ndgrad
