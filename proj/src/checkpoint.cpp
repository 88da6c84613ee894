#include "mcddpm/checkpoint.hpp"

#include <cstring>
#include <map>

#include "mcddpm/error.hpp"
#include "mcddpm/io.hpp"

namespace mcddpm {

namespace {

void write_section(ByteWriter& w, const std::string& name, const Tensor& t) {
  w.u16(std::uint16_t(name.size()));
  w.raw(name.data(), name.size());
  w.u8(std::uint8_t(t.rank()));
  for (int d : t.shape) w.u32(std::uint32_t(d));
  for (double v : t.data) w.f64(v);
}

std::pair<std::string, Tensor> read_section(ByteReader& r) {
  std::string name(r.u16(), '\0');
  r.raw(name.data(), name.size());
  std::vector<int> shape(r.u8());
  for (auto& d : shape) d = int(r.u32());
  Tensor t(shape);
  for (auto& v : t.data) v = r.f64();
  return {std::move(name), std::move(t)};
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  const auto& p = c.params;
  require(p.names.size() == p.tensors.size() && c.opt.m.size() == p.tensors.size() &&
              c.opt.v.size() == p.tensors.size(),
          ErrorKind::ShapeMismatch, "write_checkpoint: optimizer state does not match parameters");
  ByteWriter w;
  w.raw("MCDK", 4);
  w.u16(kCheckpointVersion);
  const ArchConfig& a = p.arch;
  w.i32(a.height);
  w.i32(a.width);
  w.i32(a.depth);
  w.i32(a.hidden);
  w.i32(a.kernel);
  w.i32(a.time_dim);
  w.u8(std::uint8_t(a.output_domain));
  w.i32(a.steps);
  w.f64(a.data_scale);
  w.i32(c.schedule_steps);
  w.u8(std::uint8_t(c.sigma_rule));
  w.u64(c.step);
  w.u64(c.rng.seed);
  w.u64(c.rng.stream_id);
  w.u64(c.rng.counter);
  w.u8(c.rng.has_spare ? 1 : 0);
  w.f64(c.rng.spare);
  w.f64(c.opt.hp.learning_rate);
  w.f64(c.opt.hp.beta1);
  w.f64(c.opt.hp.beta2);
  w.f64(c.opt.hp.eps);
  w.f64(c.opt.hp.weight_decay);
  w.u64(c.opt.step);
  w.u32(std::uint32_t(3 * p.tensors.size()));
  for (std::size_t k = 0; k < p.tensors.size(); ++k) write_section(w, p.names[k], p.tensors[k]);
  for (std::size_t k = 0; k < p.tensors.size(); ++k) write_section(w, "adam.m/" + p.names[k], c.opt.m[k]);
  for (std::size_t k = 0; k < p.tensors.size(); ++k) write_section(w, "adam.v/" + p.names[k], c.opt.v[k]);
  write_file_bytes(path, w.bytes());
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const std::optional<ArchConfig>& expected) {
  const auto bytes = read_file_bytes(path);
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "MCDK", 4) != 0) fail(ErrorKind::BadMagic, "'" + path.string() + "' is not a checkpoint");
  const auto version = r.u16();
  if (version != kCheckpointVersion)
    fail(ErrorKind::UnsupportedVersion,
         "'" + path.string() + "' has unsupported checkpoint version " + std::to_string(version));

  ArchConfig a;
  a.height = r.i32();
  a.width = r.i32();
  a.depth = r.i32();
  a.hidden = r.i32();
  a.kernel = r.i32();
  a.time_dim = r.i32();
  const auto domain = r.u8();
  if (domain > 1) fail(ErrorKind::Format, "checkpoint: bad output domain code");
  a.output_domain = OutputDomain(domain);
  a.steps = r.i32();
  a.data_scale = r.f64();
  try {
    a.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("checkpoint: invalid architecture record: ") + e.what());
  }
  if (expected && !(*expected == a))
    fail(ErrorKind::ArchitectureMismatch, "'" + path.string() + "' was written for a different architecture");

  Checkpoint c;
  c.schedule_steps = r.i32();
  if (c.schedule_steps != a.steps) fail(ErrorKind::Format, "checkpoint: schedule length differs from the network's");
  const auto rule = r.u8();
  if (rule > 1) fail(ErrorKind::Format, "checkpoint: bad sigma rule code");
  c.sigma_rule = SigmaRule(rule);
  c.step = r.u64();
  c.rng.seed = r.u64();
  c.rng.stream_id = r.u64();
  c.rng.counter = r.u64();
  c.rng.has_spare = r.u8() != 0;
  c.rng.spare = r.f64();
  c.opt.hp.learning_rate = r.f64();
  c.opt.hp.beta1 = r.f64();
  c.opt.hp.beta2 = r.f64();
  c.opt.hp.eps = r.f64();
  c.opt.hp.weight_decay = r.f64();
  c.opt.step = r.u64();

  std::map<std::string, Tensor> sections;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto [name, t] = read_section(r);
    if (!sections.emplace(std::move(name), std::move(t)).second)
      fail(ErrorKind::Format, "checkpoint: duplicate section");
  }
  if (r.remaining() != 0) fail(ErrorKind::Format, "checkpoint: trailing bytes");

  // The expected layout comes from the architecture record; every section must match it.
  c.params = zero_network(a);
  if (sections.size() != 3 * c.params.tensors.size())
    fail(ErrorKind::ArchitectureMismatch, "checkpoint: section count does not match the architecture");
  auto take = [&](const std::string& name, const Tensor& like) {
    auto it = sections.find(name);
    if (it == sections.end()) fail(ErrorKind::ArchitectureMismatch, "checkpoint: missing section '" + name + "'");
    if (!it->second.same_shape(like))
      fail(ErrorKind::ArchitectureMismatch, "checkpoint: section '" + name + "' has the wrong shape");
    return std::move(it->second);
  };
  for (std::size_t k = 0; k < c.params.tensors.size(); ++k) {
    const std::string& name = c.params.names[k];
    const Tensor like = c.params.tensors[k];
    c.params.tensors[k] = take(name, like);
    c.opt.m.push_back(take("adam.m/" + name, like));
    c.opt.v.push_back(take("adam.v/" + name, like));
  }
  return c;
}

}  // namespace mcddpm
