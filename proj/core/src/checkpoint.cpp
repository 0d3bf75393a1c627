//
// stgg - Copyright 2026 The stgg Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "stgg/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "stgg/error.hpp"

namespace stgg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = { 'S', 'T', 'G', 'G', 'C', 'K', 'P', 'T' };

std::string hex64(std::uint64_t x) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << x;
  return s.str();
}

template <class P>
void write_pod(std::ostream &out, const P &v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(P));
}

template <class P>
P read_pod(std::istream &in) {
  P v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(P)))
    throw FormatError(FormatErrorKind::kMalformed, "checkpoint truncated");
  return v;
}

void write_tensors(std::ostream &out, const ModelParams<float> &p) {
  p.visit([&](const std::string &, const Mat<float> &m, bool) {
    out.write(reinterpret_cast<const char *>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(float)));
  });
}

void read_tensors(std::istream &in, ModelParams<float> &p) {
  p.visit([&](const std::string &name, Mat<float> &m, bool) {
    if (!in.read(reinterpret_cast<char *>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(float))))
      throw FormatError(FormatErrorKind::kMalformed,
                        "checkpoint truncated in tensor " + name);
  });
}

}  // namespace

void save_checkpoint(const std::filesystem::path &path, const Checkpoint &c) {
  nlohmann::json tensors = nlohmann::json::array();
  c.params.visit([&](const std::string &name, const Mat<float> &m, bool) {
    tensors.push_back({ { "name", name }, { "rows", m.rows() },
                        { "cols", m.cols() } });
  });
  nlohmann::json header = {
    { "format", "stgg-checkpoint" },
    { "model", c.config.to_json() },
    { "property_spec", c.spec.to_json() },
    { "vocab_digest", hex64(c.vocab_digest) },
    { "run_config", c.run_config },
    { "tensors", tensors },
  };
  if (c.optimizer)
    header["optimizer_step"] = c.optimizer->step;
  const std::string h = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kCheckpointVersion);
  write_pod<std::uint64_t>(out, h.size());
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  write_tensors(out, c.params);
  if (c.optimizer) {
    write_tensors(out, c.optimizer->m);
    write_tensors(out, c.optimizer->v);
  }
  if (!out)
    throw FormatError(FormatErrorKind::kIo, "write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path &path,
                           const Vocab *expected_vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError(FormatErrorKind::kIo, "cannot open " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw FormatError(FormatErrorKind::kMalformed,
                      path.string() + " is not a checkpoint");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion)
    throw FormatError(FormatErrorKind::kVersionMismatch,
                      "unsupported checkpoint version " +
                          std::to_string(version));
  const auto n = read_pod<std::uint64_t>(in);
  if (n > (1u << 26))
    throw FormatError(FormatErrorKind::kMalformed, "checkpoint header too large");
  std::string h(n, '\0');
  if (!in.read(h.data(), static_cast<std::streamsize>(n)))
    throw FormatError(FormatErrorKind::kMalformed, "checkpoint truncated");

  Checkpoint c;
  try {
    const nlohmann::json header = nlohmann::json::parse(h);
    c.config = ModelConfig::from_json(header.at("model"));
    c.spec = PropertySpec::from_json(header.at("property_spec"));
    c.vocab_digest =
        std::stoull(header.at("vocab_digest").get<std::string>(), nullptr, 16);
    c.run_config = header.value("run_config", nlohmann::json::object());
    Rng shape_rng(0);
    c.params = init_params<float>(c.config, shape_rng);
    std::size_t k = 0;
    const auto &tensors = header.at("tensors");
    c.params.visit([&](const std::string &name, const Mat<float> &m, bool) {
      if (k >= tensors.size() || tensors[k].at("name") != name ||
          tensors[k].at("rows").get<long>() != m.rows() ||
          tensors[k].at("cols").get<long>() != m.cols())
        throw FormatError(FormatErrorKind::kMalformed,
                          "tensor table does not match the model config at " +
                              name);
      ++k;
    });
    if (k != tensors.size())
      throw FormatError(FormatErrorKind::kMalformed, "extra tensors in header");
    if (header.contains("optimizer_step")) {
      c.optimizer.emplace();
      c.optimizer->step = header.at("optimizer_step").get<long>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("bad checkpoint header: ") + e.what());
  } catch (const ArgumentError &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("bad checkpoint header: ") + e.what());
  } catch (const std::logic_error &e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("bad checkpoint header: ") + e.what());
  }
  if (expected_vocab && expected_vocab->digest() != c.vocab_digest)
    throw FormatError(FormatErrorKind::kHashMismatch,
                      "checkpoint was trained with a different vocabulary");

  read_tensors(in, c.params);
  if (c.optimizer) {
    c.optimizer->m = c.params.zeros_like();
    c.optimizer->v = c.params.zeros_like();
    read_tensors(in, c.optimizer->m);
    read_tensors(in, c.optimizer->v);
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(FormatErrorKind::kMalformed, "trailing bytes in checkpoint");
  return c;
}

}  // namespace stgg
