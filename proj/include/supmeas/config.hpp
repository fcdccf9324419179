#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "supmeas/body_io.hpp"
#include "supmeas/harness.hpp"

namespace supmeas {

/// Experiment configuration grammar (one directive per line, '#' comments):
///
///   seed <u64>          samples <count>      workers <count>
///   grid <cell size>    atom_cap <count>     groups <count>
///
///   body <name>         # block; inner lines use the body grammar
///     kind ball
///     center 0 0 0
///     radius 1
///   end
///
///   family              # block
///     kind translate | cap_cut | minkowski_round | vertex_jitter
///     direction <x1> ... <xn>     (translate)
///     cap_index <i>               (cap_cut)
///     jitter_seed <u64>           (vertex_jitter)
///     ladder <e1> <e2> ...        (strictly decreasing)
///   end
///
///   lemma41             # block
///     rho <r>
///     trials <count>    # randomized battery when > 0
///   end
struct Config {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  std::size_t workers = 1;
  std::optional<double> grid;
  std::optional<std::size_t> atom_cap;
  std::size_t groups = 8;

  std::map<std::string, ConvexBody> bodies;
  std::vector<std::string> body_order;
  std::optional<PerturbationFamily> family;

  double lemma41_rho = 1.0;
  std::size_t lemma41_trials = 0;
};

inline Config parse_config(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    auto need = [&](std::size_t k, const char* what) {
      if (toks.size() != k)
        fail(ErrorKind::ParseError, std::string("config: bad arity for ") + what);
    };
    auto read_block = [&](std::string& dst) {
      std::string inner;
      while (std::getline(in, inner)) {
        auto t2 = detail::split_ws(inner);
        if (!t2.empty() && t2[0] == "end") return;
        dst += inner;
        dst += '\n';
      }
      fail(ErrorKind::ParseError, "config: unterminated block '" + key + "'");
    };

    if (key == "seed") {
      need(2, "seed");
      cfg.seed = std::strtoull(toks[1].c_str(), nullptr, 10);
    } else if (key == "samples") {
      need(2, "samples");
      cfg.samples = std::strtoull(toks[1].c_str(), nullptr, 10);
    } else if (key == "workers") {
      need(2, "workers");
      cfg.workers = std::strtoull(toks[1].c_str(), nullptr, 10);
    } else if (key == "grid") {
      need(2, "grid");
      cfg.grid = detail::parse_number(toks[1], "grid");
    } else if (key == "atom_cap") {
      need(2, "atom_cap");
      cfg.atom_cap = std::strtoull(toks[1].c_str(), nullptr, 10);
    } else if (key == "groups") {
      need(2, "groups");
      cfg.groups = std::strtoull(toks[1].c_str(), nullptr, 10);
    } else if (key == "body") {
      need(2, "body");
      std::string inner;
      read_block(inner);
      cfg.bodies.emplace(toks[1], parse_body(inner));
      cfg.body_order.push_back(toks[1]);
    } else if (key == "family") {
      need(1, "family");
      std::string inner;
      read_block(inner);
      PerturbationFamily fam;
      std::istringstream fin(inner);
      std::string fline;
      while (std::getline(fin, fline)) {
        auto ft = detail::split_ws(fline);
        if (ft.empty()) continue;
        if (ft[0] == "kind") {
          if (ft.size() != 2) fail(ErrorKind::ParseError, "config: family kind");
          if (ft[1] == "translate") fam.kind = FamilyKind::Translate;
          else if (ft[1] == "cap_cut") fam.kind = FamilyKind::CapCut;
          else if (ft[1] == "minkowski_round") fam.kind = FamilyKind::MinkowskiRound;
          else if (ft[1] == "vertex_jitter") fam.kind = FamilyKind::VertexJitter;
          else fail(ErrorKind::ParseError, "config: unknown family kind " + ft[1]);
        } else if (ft[0] == "direction") {
          fam.direction = detail::parse_vec(ft, 1, ft.size() - 1, "direction");
        } else if (ft[0] == "cap_index") {
          fam.cap_index = std::strtoull(ft[1].c_str(), nullptr, 10);
        } else if (ft[0] == "jitter_seed") {
          fam.jitter_seed = std::strtoull(ft[1].c_str(), nullptr, 10);
        } else if (ft[0] == "ladder") {
          for (std::size_t k = 1; k < ft.size(); ++k)
            fam.ladder.push_back(detail::parse_number(ft[k], "ladder"));
        } else {
          fail(ErrorKind::ParseError, "config: unknown family key " + ft[0]);
        }
      }
      cfg.family = std::move(fam);
    } else if (key == "lemma41") {
      need(1, "lemma41");
      std::string inner;
      read_block(inner);
      std::istringstream lin(inner);
      std::string lline;
      while (std::getline(lin, lline)) {
        auto lt = detail::split_ws(lline);
        if (lt.empty()) continue;
        if (lt[0] == "rho") cfg.lemma41_rho = detail::parse_number(lt[1], "rho");
        else if (lt[0] == "trials")
          cfg.lemma41_trials = std::strtoull(lt[1].c_str(), nullptr, 10);
        else fail(ErrorKind::ParseError, "config: unknown lemma41 key " + lt[0]);
      }
    } else {
      fail(ErrorKind::ParseError, "config: unknown directive '" + key + "'");
    }
  }
  return cfg;
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

} // namespace supmeas
