#include "maem/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace maem {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace {

void write_spec_line(std::ostream& os, const char* tag, const MlpSpec& spec) {
  os << tag;
  for (long w : spec.layer_widths) os << ' ' << w;
  os << ' ' << activation_name(spec.hidden_activation) << ' '
     << activation_name(spec.output_activation) << '\n';
}

MlpSpec parse_spec_line(const std::string& line, const std::string& tag) {
  std::istringstream is(line);
  std::string head;
  is >> head;
  if (head != tag) {
    throw std::runtime_error("checkpoint: expected '" + tag + "' line, got '" +
                             line + "'");
  }
  std::vector<std::string> tokens;
  std::string tok;
  while (is >> tok) tokens.push_back(tok);
  if (tokens.size() < 4) throw std::runtime_error("checkpoint: malformed " + tag + " line");
  MlpSpec spec;
  for (std::size_t i = 0; i + 2 < tokens.size(); ++i) {
    spec.layer_widths.push_back(std::stol(tokens[i]));
  }
  spec.hidden_activation = activation_from_string(tokens[tokens.size() - 2]);
  spec.output_activation = activation_from_string(tokens[tokens.size() - 1]);
  spec.validate();
  return spec;
}

}  // namespace

void save_checkpoint(const std::string& path, const Generator& gen,
                     const Discriminator& disc) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  os << "maemlab-checkpoint v1\n";
  write_spec_line(os, "generator", gen.net.spec());
  write_spec_line(os, "discriminator", disc.net.spec());
  const long total = gen.net.parameter_count() + disc.net.parameter_count();
  os << "doubles " << total << '\n';
  for (const auto* net : {&gen.net, &disc.net}) {
    for (const auto& p : net->parameters()) {
      auto v = p.values();
      os.write(reinterpret_cast<const char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
  }
  if (!os) throw std::runtime_error("checkpoint: write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  std::string line;
  std::getline(is, line);
  if (line != "maemlab-checkpoint v1") {
    throw std::runtime_error("checkpoint: bad magic line '" + line + "'");
  }
  std::getline(is, line);
  MlpSpec gen_spec = parse_spec_line(line, "generator");
  std::getline(is, line);
  MlpSpec disc_spec = parse_spec_line(line, "discriminator");
  std::getline(is, line);
  long total = 0;
  {
    std::istringstream hs(line);
    std::string head;
    hs >> head >> total;
    if (head != "doubles" || total <= 0) {
      throw std::runtime_error("checkpoint: malformed doubles line '" + line + "'");
    }
  }

  Checkpoint ckpt;
  ckpt.gen = Generator(gen_spec, /*seed=*/0);
  ckpt.disc = Discriminator(disc_spec, /*seed=*/0);
  if (ckpt.gen.net.parameter_count() + ckpt.disc.net.parameter_count() != total) {
    throw std::runtime_error("checkpoint: parameter count mismatch in '" + path + "'");
  }
  for (auto* net : {&ckpt.gen.net, &ckpt.disc.net}) {
    for (auto& p : net->parameters()) {
      auto v = p.values_mut();
      is.read(reinterpret_cast<char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
      if (!is) throw std::runtime_error("checkpoint: truncated parameter data in '" + path + "'");
    }
  }
  return ckpt;
}

}  // namespace maem
