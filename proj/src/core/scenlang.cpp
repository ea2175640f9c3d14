// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/scenlang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <tuple>

namespace scenforge::scenlang {

std::vector<Assertion> default_assertions(const AssertionDefaults& d) {
  return {Assertion::never_collision(), Assertion::always_clearance(d.clearance),
          Assertion::eventually_at_destination(d.within, d.radius)};
}

std::vector<const TrajectoryDef*> ConcreteScenario::participants() const {
  std::vector<const TrajectoryDef*> out;
  for (const auto& t : npcs) out.push_back(&t);
  for (const auto& t : pedestrians) out.push_back(&t);
  return out;
}

const TrajectoryDef* ConcreteScenario::find(std::string_view name) const {
  for (const auto* t : participants())
    if (t->name == name) return t;
  return nullptr;
}

bool ConcreteScenario::remove(std::string_view name) {
  auto drop = [&](std::vector<TrajectoryDef>& v) {
    auto it = std::find_if(v.begin(), v.end(), [&](const TrajectoryDef& t) { return t.name == name; });
    if (it == v.end()) return false;
    v.erase(it);
    return true;
  };
  return drop(npcs) || drop(pedestrians);
}

std::string Diagnostic::str() const {
  if (line <= 0) return message;
  return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

bool is_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto head = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!head(name[0])) return false;
  return std::all_of(name.begin() + 1, name.end(),
                     [&](char c) { return head(c) || (c >= '0' && c <= '9'); });
}

namespace {

enum class Tok { ident, string, number, lparen, rparen, lbrace, rbrace, lbracket, rbracket, comma, arrow, ge, eq, end };

std::string_view tok_name(Tok t) {
  switch (t) {
    case Tok::ident: return "identifier";
    case Tok::string: return "string";
    case Tok::number: return "number";
    case Tok::lparen: return "'('";
    case Tok::rparen: return "')'";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::lbracket: return "'['";
    case Tok::rbracket: return "']'";
    case Tok::comma: return "','";
    case Tok::arrow: return "'->'";
    case Tok::ge: return "'>='";
    case Tok::eq: return "'='";
    case Tok::end: return "end of input";
  }
  return "?";
}

struct Token {
  Tok kind = Tok::end;
  std::string text;  // identifier or decoded string
  double number = 0.0;
  int line = 1;
  int column = 1;
};

struct SyntaxError {
  int line;
  int column;
  std::string message;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    auto single = [&](Tok k) {
      advance();
      t.kind = k;
      return t;
    };
    switch (c) {
      case '(': return single(Tok::lparen);
      case ')': return single(Tok::rparen);
      case '{': return single(Tok::lbrace);
      case '}': return single(Tok::rbrace);
      case '[': return single(Tok::lbracket);
      case ']': return single(Tok::rbracket);
      case ',': return single(Tok::comma);
      case '=': return single(Tok::eq);
      case '"': return string_literal(t);
      default: break;
    }
    if (c == '>' && peek(1) == '=') {
      advance();
      advance();
      t.kind = Tok::ge;
      return t;
    }
    if (c == '-' && peek(1) == '>') {
      advance();
      advance();
      t.kind = Tok::arrow;
      return t;
    }
    // U+2192 RIGHTWARDS ARROW
    if (static_cast<unsigned char>(c) == 0xE2 && static_cast<unsigned char>(peek(1)) == 0x86 &&
        static_cast<unsigned char>(peek(2)) == 0x92) {
      pos_ += 3;
      ++col_;
      t.kind = Tok::arrow;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.')
      return number(t);
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t b = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        advance();
      t.kind = Tok::ident;
      t.text = std::string(src_.substr(b, pos_ - b));
      return t;
    }
    throw SyntaxError{t.line, t.column, describe_char(c)};
  }

 private:
  char peek(std::size_t k) const { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  static std::string describe_char(char c) {
    char buf[48];
    const auto u = static_cast<unsigned char>(c);
    if (u >= 0x20 && u < 0x7f)
      std::snprintf(buf, sizeof buf, "unexpected character '%c'", c);
    else
      std::snprintf(buf, sizeof buf, "unexpected byte 0x%02X", u);
    return buf;
  }

  static int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  Token string_literal(Token t) {
    advance();
    std::string out;
    while (true) {
      if (pos_ >= src_.size()) throw SyntaxError{t.line, t.column, "unterminated string"};
      const char c = src_[pos_];
      if (c == '"') {
        advance();
        break;
      }
      if (static_cast<unsigned char>(c) < 0x20)
        throw SyntaxError{line_, col_, "control character in string"};
      if (c == '\\') {
        const int l = line_, col = col_;
        advance();
        const char e = peek(0);
        if (e == '"' || e == '\\') {
          out.push_back(e);
          advance();
        } else if (e == 'n') {
          out.push_back('\n');
          advance();
        } else if (e == 't') {
          out.push_back('\t');
          advance();
        } else if (e == 'x') {
          const int hi = hex_value(peek(1)), lo = hex_value(peek(2));
          if (hi < 0 || lo < 0) throw SyntaxError{l, col, "malformed \\x escape"};
          out.push_back(static_cast<char>(hi * 16 + lo));
          advance();
          advance();
          advance();
        } else {
          throw SyntaxError{l, col, "unknown escape sequence"};
        }
        continue;
      }
      out.push_back(c);
      advance();
    }
    t.kind = Tok::string;
    t.text = std::move(out);
    return t;
  }

  Token number(Token t) {
    const std::size_t b = pos_;
    if (src_[pos_] == '-' || src_[pos_] == '+') advance();
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        advance();
        ++n;
      }
      return n;
    };
    std::size_t n = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      n += digits();
    }
    if (n == 0) throw SyntaxError{t.line, t.column, "malformed number"};
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '-' || src_[pos_] == '+')) advance();
      if (digits() == 0) throw SyntaxError{t.line, t.column, "malformed number exponent"};
    }
    std::string_view lex = src_.substr(b, pos_ - b);
    if (!lex.empty() && lex[0] == '+') lex.remove_prefix(1);
    double v = 0.0;
    const auto r = std::from_chars(lex.data(), lex.data() + lex.size(), v);
    if (r.ec != std::errc{} || r.ptr != lex.data() + lex.size() || !std::isfinite(v))
      throw SyntaxError{t.line, t.column, "number out of range"};
    t.kind = Tok::number;
    t.number = v;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lex_(text) { cur_ = lex_.next(); }

  ParseResult run() {
    ParseResult res;
    ConcreteScenario s;
    bool have_map = false, have_ego = false, have_assert = false;
    try {
      while (cur_.kind != Tok::end) {
        const Token head = cur_;
        if (head.kind != Tok::ident) fail_at(head, "expected a section keyword");
        if (head.text == "map") {
          bump();
          if (have_map) semantic(head, "duplicate map section");
          have_map = true;
          s.map_id = expect(Tok::string, "map id").text;
        } else if (head.text == "ego") {
          bump();
          if (have_ego) semantic(head, "duplicate ego section");
          have_ego = true;
          s.ego = ego_task();
        } else if (head.text == "npc") {
          bump();
          s.npcs.push_back(trajectory(false));
        } else if (head.text == "pedestrian") {
          bump();
          s.pedestrians.push_back(trajectory(true));
        } else if (head.text == "assert") {
          bump();
          if (have_assert) semantic(head, "duplicate assert section");
          have_assert = true;
          s.assertions = assertions();
        } else {
          fail_at(head, "unknown section '" + head.text + "'");
        }
      }
    } catch (const SyntaxError& e) {
      res.diagnostics.push_back({e.line, e.column, e.message});
      return res;
    }
    if (!have_map) res.diagnostics.push_back({0, 0, "missing component: map"});
    if (!have_ego) res.diagnostics.push_back({0, 0, "missing component: ego driving task"});
    if (!have_assert) s.assertions = default_assertions();
    std::set<std::string> seen;
    for (const auto& [tok, name] : names_) {
      if (!seen.insert(name).second)
        res.diagnostics.push_back({tok.line, tok.column, "duplicate participant name '" + name + "'"});
    }
    for (auto& d : semantic_) res.diagnostics.push_back(std::move(d));
    if (have_ego && s.ego.start == s.ego.destination)
      res.diagnostics.push_back({0, 0, "ego start and destination coincide"});
    if (res.diagnostics.empty()) res.scenario = std::move(s);
    std::stable_sort(res.diagnostics.begin(), res.diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       return std::tie(a.line, a.column) < std::tie(b.line, b.column);
                     });
    return res;
  }

 private:
  [[noreturn]] void fail_at(const Token& t, const std::string& msg) {
    throw SyntaxError{t.line, t.column, msg};
  }

  void semantic(const Token& t, const std::string& msg) { semantic_.push_back({t.line, t.column, msg}); }

  void bump() { cur_ = lex_.next(); }

  Token expect(Tok k, std::string_view what) {
    if (cur_.kind != k)
      fail_at(cur_, "expected " + std::string(what) + " (" + std::string(tok_name(k)) + "), found " +
                        std::string(tok_name(cur_.kind)));
    Token t = cur_;
    bump();
    return t;
  }

  void keyword(std::string_view kw) {
    if (cur_.kind != Tok::ident || cur_.text != kw)
      fail_at(cur_, "expected '" + std::string(kw) + "'");
    bump();
  }

  bool accept_keyword(std::string_view kw) {
    if (cur_.kind == Tok::ident && cur_.text == kw) {
      bump();
      return true;
    }
    return false;
  }

  double number(std::string_view what) { return expect(Tok::number, what).number; }

  double non_negative(std::string_view what) {
    const Token t = expect(Tok::number, what);
    if (t.number < 0.0) semantic(t, std::string(what) + " must be non-negative");
    return t.number;
  }

  double positive(std::string_view what) {
    const Token t = expect(Tok::number, what);
    if (!(t.number > 0.0)) semantic(t, std::string(what) + " must be positive");
    return t.number;
  }

  LanePosition lane_position_body() {
    LanePosition p;
    p.lane = expect(Tok::string, "lane id").text;
    expect(Tok::arrow, "arrow");
    p.offset = non_negative("lane offset");
    return p;
  }

  LanePosition parenthesized_lane_position() {
    expect(Tok::lparen, "lane position");
    LanePosition p = lane_position_body();
    expect(Tok::rparen, "end of lane position");
    return p;
  }

  EgoTask ego_task() {
    EgoTask e;
    const Token t = expect(Tok::ident, "ego vehicle type");
    const auto type = participant_type_from_string(t.text);
    if (!type || *type == ParticipantType::pedestrian)
      semantic(t, "ego vehicle type must be car or truck");
    else
      e.type = *type;
    expect(Tok::lbrace, "ego block");
    keyword("start");
    e.start = parenthesized_lane_position();
    keyword("destination");
    e.destination = parenthesized_lane_position();
    expect(Tok::rbrace, "end of ego block");
    return e;
  }

  std::string name() {
    if (cur_.kind == Tok::ident || cur_.kind == Tok::string) {
      Token t = cur_;
      bump();
      if (t.text.empty()) semantic(t, "empty participant name");
      names_.emplace_back(t, t.text);
      return t.text;
    }
    fail_at(cur_, "expected participant name");
  }

  Waypoint waypoint() {
    Waypoint w;
    expect(Tok::lparen, "waypoint");
    if (cur_.kind == Tok::lbracket) {
      bump();
      Vec2 p;
      p.x = number("x coordinate");
      expect(Tok::comma, "comma");
      p.y = number("y coordinate");
      expect(Tok::rbracket, "end of point");
      w.position = p;
    } else {
      w.position = lane_position_body();
    }
    expect(Tok::comma, "comma before lateral offset");
    if (cur_.kind == Tok::number) {
      const Token t = cur_;
      w.lateral = number("lateral offset");
      if (std::holds_alternative<Vec2>(w.position))
        semantic(t, "lateral offset only applies to lane positions");
    }
    expect(Tok::comma, "comma before speed");
    w.speed = non_negative("speed");
    if (cur_.kind == Tok::comma) {
      bump();
      keyword("t");
      expect(Tok::eq, "'=' after t");
      w.time = non_negative("waypoint time");
    }
    expect(Tok::rparen, "end of waypoint");
    return w;
  }

  TrajectoryDef trajectory(bool pedestrian) {
    TrajectoryDef d;
    const Token head = cur_;
    if (pedestrian) {
      d.type = ParticipantType::pedestrian;
    } else {
      const Token t = expect(Tok::ident, "npc vehicle type");
      const auto type = participant_type_from_string(t.text);
      if (!type || *type == ParticipantType::pedestrian)
        semantic(t, "npc type must be car or truck");
      else
        d.type = *type;
    }
    d.name = name();
    if (accept_keyword("size")) {
      Footprint f;
      f.length = positive("footprint length");
      f.width = positive("footprint width");
      d.size = f;
    }
    expect(Tok::lparen, "waypoint list");
    while (true) {
      d.waypoints.push_back(waypoint());
      if (cur_.kind == Tok::comma) {
        bump();
        if (cur_.kind == Tok::rparen) break;
        continue;
      }
      break;
    }
    expect(Tok::rparen, "end of waypoint list");
    if (d.waypoints.size() < 2) semantic(head, "trajectory '" + d.name + "' needs at least 2 waypoints");
    double last = -1.0;
    for (const auto& w : d.waypoints) {
      if (!w.time) continue;
      if (*w.time <= last) semantic(head, "waypoint times of '" + d.name + "' must increase");
      last = *w.time;
    }
    return d;
  }

  std::vector<Assertion> assertions() {
    std::vector<Assertion> out;
    expect(Tok::lbrace, "assert block");
    while (cur_.kind != Tok::rbrace) {
      const Token t = expect(Tok::ident, "assertion");
      if (t.text == "never") {
        keyword("collision");
        out.push_back(Assertion::never_collision());
      } else if (t.text == "always") {
        keyword("clearance");
        expect(Tok::ge, "'>='");
        out.push_back(Assertion::always_clearance(positive("clearance")));
      } else if (t.text == "eventually") {
        keyword("within");
        const double within = positive("deadline");
        keyword("at_destination");
        out.push_back(Assertion::eventually_at_destination(within, positive("destination radius")));
      } else {
        fail_at(t, "unknown assertion '" + t.text + "'");
      }
    }
    bump();
    return out;
  }

  Lexer lex_;
  Token cur_;
  std::vector<std::pair<Token, std::string>> names_;
  std::vector<Diagnostic> semantic_;
};

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '"' || c == '\\') {
      out.push_back('\\');
      out.push_back(c);
    } else if (u >= 0x20 && u < 0x7f) {
      out.push_back(c);
    } else {
      char buf[8];
      std::snprintf(buf, sizeof buf, "\\x%02X", u);
      out += buf;
    }
  }
  out.push_back('"');
  return out;
}

std::string print_name(std::string_view n) { return is_identifier(n) ? std::string(n) : quote(n); }

std::string print_lane_position(const LanePosition& p) { return quote(p.lane) + "->" + fmt(p.offset); }

std::string print_waypoint(const Waypoint& w) {
  std::string out = "(";
  if (const auto* lp = std::get_if<LanePosition>(&w.position))
    out += print_lane_position(*lp);
  else {
    const auto& v = std::get<Vec2>(w.position);
    out += "[" + fmt(v.x) + ", " + fmt(v.y) + "]";
  }
  out += ", ";
  if (w.lateral) out += fmt(*w.lateral);
  out += ", " + fmt(w.speed);
  if (w.time) out += ", t=" + fmt(*w.time);
  return out + ")";
}

void print_trajectory(std::string& out, const TrajectoryDef& d, bool pedestrian) {
  out += pedestrian ? "pedestrian " : "npc " + std::string(to_string(d.type)) + " ";
  out += print_name(d.name);
  if (d.size) out += " size " + fmt(d.size->length) + " " + fmt(d.size->width);
  out += " (\n";
  for (std::size_t i = 0; i < d.waypoints.size(); ++i) {
    out += "  " + print_waypoint(d.waypoints[i]);
    out += i + 1 < d.waypoints.size() ? ",\n" : "\n";
  }
  out += ")\n\n";
}

}  // namespace

ParseResult parse_scenario(std::string_view text) {
  try {
    return Parser(text).run();
  } catch (const SyntaxError& e) {
    // The lexer runs one token ahead, so errors can surface from the constructor.
    ParseResult r;
    r.diagnostics.push_back({e.line, e.column, e.message});
    return r;
  }
}

ConcreteScenario parse_scenario_or_throw(std::string_view text) {
  ParseResult r = parse_scenario(text);
  if (!r.scenario) {
    std::string msg;
    for (const auto& d : r.diagnostics) {
      if (!msg.empty()) msg += "\n";
      msg += d.str();
    }
    fail(ErrorKind::parse, msg);
  }
  return std::move(*r.scenario);
}

std::string print_scenario(const ConcreteScenario& s) {
  std::string out = "map " + quote(s.map_id) + "\n\n";
  out += "ego " + std::string(to_string(s.ego.type)) + " {\n";
  out += "  start (" + print_lane_position(s.ego.start) + ")\n";
  out += "  destination (" + print_lane_position(s.ego.destination) + ")\n}\n\n";
  for (const auto& n : s.npcs) print_trajectory(out, n, false);
  for (const auto& p : s.pedestrians) print_trajectory(out, p, true);
  out += "assert {\n";
  for (const auto& a : s.assertions) {
    switch (a.kind) {
      case AssertionKind::never_collision: out += "  never collision\n"; break;
      case AssertionKind::always_clearance: out += "  always clearance >= " + fmt(a.clearance) + "\n"; break;
      case AssertionKind::eventually_at_destination:
        out += "  eventually within " + fmt(a.within) + " at_destination " + fmt(a.radius) + "\n";
        break;
    }
  }
  out += "}\n";
  return out;
}

std::vector<Diagnostic> validate_refs(const ConcreteScenario& s, const RoadMap& map) {
  std::vector<Diagnostic> out;
  if (s.map_id != map.id())
    out.push_back({0, 0, "scenario map '" + s.map_id + "' does not match loaded map '" + map.id() + "'"});
  auto check = [&](const LanePosition& p, const std::string& who) {
    const Lane* lane = map.find(p.lane);
    if (!lane) {
      out.push_back({0, 0, who + ": unresolved lane reference '" + p.lane + "'"});
      return;
    }
    if (p.offset < 0.0 || p.offset > lane->length())
      out.push_back({0, 0, who + ": offset " + fmt(p.offset) + " out of range for lane '" + p.lane +
                               "' of length " + fmt(lane->length())});
  };
  check(s.ego.start, "ego start");
  check(s.ego.destination, "ego destination");
  for (const auto* t : s.participants())
    for (const auto& w : t->waypoints)
      if (const auto* lp = std::get_if<LanePosition>(&w.position)) check(*lp, t->name);
  return out;
}

Vec2 resolve(const WaypointPosition& p, std::optional<double> lateral, const RoadMap& map) {
  if (const auto* lp = std::get_if<LanePosition>(&p))
    return map.world_point(lp->lane, lp->offset, lateral.value_or(0.0));
  return std::get<Vec2>(p);
}

}  // namespace scenforge::scenlang
