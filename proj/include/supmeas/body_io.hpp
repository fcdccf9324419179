#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "supmeas/body.hpp"
#include "supmeas/error.hpp"
#include "supmeas/vec.hpp"

namespace supmeas {

/// Body description grammar (one directive per line, '#' comments):
///
///   kind vpolytope | hpolytope | ball | ballcut
///   outer_radius <r>            (optional, default 0)
///   vertex <x1> ... <xn>        (vpolytope; one line per vertex)
///   halfspace <n1> ... <nn> <offset>   (hpolytope/ballcut; unit normal)
///   center <x1> ... <xn>        (ball/ballcut)
///   radius <r>                  (ball/ballcut)
///
/// Numbers are parsed with strtod (exact decimal or hex-float input);
/// body_to_text writes round-trip precision.

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (!tok.empty() && tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

inline double parse_number(const std::string& tok, const char* what) {
  const char* s = tok.c_str();
  char* end = nullptr;
  double v = std::strtod(s, &end);
  if (end == s || *end != '\0')
    fail(ErrorKind::ParseError, std::string("body parse: bad number for ") + what +
                                    ": '" + tok + "'");
  return v;
}

inline Vec parse_vec(const std::vector<std::string>& toks, std::size_t first,
                     std::size_t count, const char* what) {
  if (toks.size() != first + count)
    fail(ErrorKind::ParseError,
         std::string("body parse: expected ") + std::to_string(count) +
             " numbers after '" + what + "'");
  Vec v(count);
  for (std::size_t k = 0; k < count; ++k)
    v[k] = parse_number(toks[first + k], what);
  return v;
}

} // namespace detail

inline ConvexBody parse_body(const std::string& text) {
  std::istringstream in(text);
  std::string line, kind;
  double outer_radius = 0.0, radius = -1.0;
  bool have_center = false;
  Vec center;
  std::vector<Vec> vertices;
  std::vector<Halfspace> halfspaces;

  while (std::getline(in, line)) {
    auto toks = detail::split_ws(line);
    if (toks.empty()) continue;
    const std::string& key = toks[0];
    if (key == "kind") {
      if (toks.size() != 2) fail(ErrorKind::ParseError, "body parse: kind needs one word");
      kind = toks[1];
    } else if (key == "outer_radius") {
      if (toks.size() != 2) fail(ErrorKind::ParseError, "body parse: outer_radius needs a number");
      outer_radius = detail::parse_number(toks[1], "outer_radius");
    } else if (key == "radius") {
      if (toks.size() != 2) fail(ErrorKind::ParseError, "body parse: radius needs a number");
      radius = detail::parse_number(toks[1], "radius");
    } else if (key == "center") {
      center = detail::parse_vec(toks, 1, toks.size() - 1, "center");
      have_center = true;
    } else if (key == "vertex") {
      vertices.push_back(detail::parse_vec(toks, 1, toks.size() - 1, "vertex"));
    } else if (key == "halfspace") {
      if (toks.size() < 4)
        fail(ErrorKind::ParseError, "body parse: halfspace needs normal + offset");
      Vec n(toks.size() - 2);
      for (std::size_t k = 0; k + 2 < toks.size(); ++k)
        n[k] = detail::parse_number(toks[k + 1], "halfspace normal");
      double off = detail::parse_number(toks.back(), "halfspace offset");
      halfspaces.push_back(Halfspace{n, off});
    } else {
      fail(ErrorKind::ParseError, "body parse: unknown directive '" + key + "'");
    }
  }

  if (kind == "vpolytope") return ConvexBody::vpolytope(vertices, outer_radius);
  if (kind == "hpolytope") return ConvexBody::hpolytope(halfspaces, outer_radius);
  if (kind == "ball") {
    if (!have_center || radius < 0.0)
      fail(ErrorKind::ParseError, "body parse: ball needs center and radius");
    return ConvexBody::ball(center, radius, outer_radius);
  }
  if (kind == "ballcut") {
    if (!have_center || radius < 0.0)
      fail(ErrorKind::ParseError, "body parse: ballcut needs center and radius");
    return ConvexBody::ball_cut(center, radius, halfspaces, outer_radius);
  }
  fail(ErrorKind::ParseError, "body parse: missing or unknown kind '" + kind + "'");
}

inline ConvexBody load_body(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open body file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_body(buf.str());
}

inline std::string body_to_text(const ConvexBody& K) {
  std::ostringstream out;
  char num[64];
  auto put = [&](double v) {
    std::snprintf(num, sizeof num, "%.17g", v);
    out << ' ' << num;
  };
  auto put_vec = [&](const Vec& v) {
    for (std::size_t k = 0; k < v.size(); ++k) put(v[k]);
  };
  switch (K.kind()) {
    case BodyKind::VPolytope:
      out << "kind vpolytope\n";
      for (const auto& v : K.vertices()) {
        out << "vertex";
        put_vec(v);
        out << '\n';
      }
      break;
    case BodyKind::HPolytope:
      out << "kind hpolytope\n";
      break;
    case BodyKind::Ball:
    case BodyKind::BallCut:
      out << (K.kind() == BodyKind::Ball ? "kind ball\n" : "kind ballcut\n");
      out << "center";
      put_vec(K.center());
      out << "\nradius";
      put(K.radius());
      out << '\n';
      break;
  }
  if (K.kind() == BodyKind::HPolytope || K.kind() == BodyKind::BallCut)
    for (const auto& h : K.halfspaces()) {
      out << "halfspace";
      put_vec(h.normal);
      put(h.offset);
      out << '\n';
    }
  if (K.outer_radius() != 0.0) {
    out << "outer_radius";
    put(K.outer_radius());
    out << '\n';
  }
  return out.str();
}

} // namespace supmeas
