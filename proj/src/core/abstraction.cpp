// Copyright 2026 The scenforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenforge/abstraction.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "httplib.h"

namespace scenforge::abstraction {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::ego: return "ego";
    case Role::npc: return "npc";
    case Role::pedestrian: return "pedestrian";
  }
  return "?";
}

std::string_view to_string(Signal s) {
  switch (s) {
    case Signal::none: return "none";
    case Signal::light_green: return "light_green";
    case Signal::light_red: return "light_red";
    case Signal::stop_sign: return "stop_sign";
  }
  return "?";
}

std::optional<Signal> signal_from_string(std::string_view s) {
  for (Signal v : {Signal::none, Signal::light_green, Signal::light_red, Signal::stop_sign})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

const ParticipantSpec& AbstractScenario::ego() const {
  for (const auto& p : participants)
    if (p.role == Role::ego) return p;
  fail(ErrorKind::precondition, "abstract scenario has no ego participant");
}

std::vector<const ParticipantSpec*> AbstractScenario::with_role(Role r) const {
  std::vector<const ParticipantSpec*> out;
  for (const auto& p : participants)
    if (p.role == r) out.push_back(&p);
  return out;
}

void validate(const AbstractScenario& a) {
  const auto egos = a.with_role(Role::ego).size();
  require(egos == 1, "abstract scenario needs exactly one ego, found " + std::to_string(egos));
  for (const auto& p : a.participants) {
    const std::string who(to_string(p.role));
    require(!p.behaviors.empty(), who + " participant has no behaviors");
    if (p.role == Role::pedestrian) {
      require(!p.vehicle_type, "pedestrian cannot have a vehicle type");
      for (Action b : p.behaviors)
        require(is_pedestrian_action(b), "'" + std::string(to_string(b)) + "' is not a pedestrian action");
    } else {
      require(p.vehicle_type && *p.vehicle_type != ParticipantType::pedestrian,
              who + " participant needs a vehicle type (car or truck)");
      for (Action b : p.behaviors)
        require(is_vehicle_action(b), "'" + std::string(to_string(b)) + "' is not a vehicle action");
    }
    if (p.role == Role::ego)
      require(!p.relative_position, "ego cannot have a relative position");
    else
      require(p.relative_position.has_value(), who + " participant needs a relative position");
    if (p.speed) require(*p.speed > 0.0, "speed hint must be positive");
  }
}

namespace {

nlohmann::json participant_json(const ParticipantSpec& p) {
  nlohmann::json j;
  j["role"] = to_string(p.role);
  j["type"] = p.vehicle_type ? std::string(to_string(*p.vehicle_type)) : "none";
  nlohmann::json b = nlohmann::json::array();
  for (Action a : p.behaviors) b.push_back(to_string(a));
  j["behaviors"] = b;
  if (p.relative_position) j["position"] = to_string(*p.relative_position);
  if (p.speed) j["speed"] = *p.speed;
  return j;
}

Role role_from(const std::string& s) {
  if (s == "ego") return Role::ego;
  if (s == "npc") return Role::npc;
  if (s == "pedestrian") return Role::pedestrian;
  fail(ErrorKind::parse, "unknown role '" + s + "'");
}

template <class T, class F>
T lookup(const std::string& s, F f, const std::string& what) {
  if (auto v = f(s)) return *v;
  fail(ErrorKind::parse, "unknown " + what + " '" + s + "'");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_json_file(const std::string& path) {
  const std::string text = slurp(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const AbstractScenario& a) {
  nlohmann::json j;
  j["id"] = a.id;
  j["road_type"] = to_string(a.road_type);
  j["traffic_signal"] = to_string(a.traffic_signal);
  j["participants"] = nlohmann::json::array();
  for (const auto& p : a.participants) j["participants"].push_back(participant_json(p));
  j["notes"] = a.notes;
  return j;
}

AbstractScenario abstract_from_json(const nlohmann::json& j) {
  try {
    AbstractScenario a;
    a.id = j.value("id", "");
    a.road_type = lookup<RoadType>(j.at("road_type").get<std::string>(), road_type_from_string, "road type");
    a.traffic_signal =
        lookup<Signal>(j.value("traffic_signal", std::string("none")), signal_from_string, "traffic signal");
    for (const auto& pj : j.at("participants")) {
      ParticipantSpec p;
      p.role = role_from(pj.at("role").get<std::string>());
      const std::string type = pj.value("type", std::string("none"));
      if (type != "none")
        p.vehicle_type = lookup<ParticipantType>(type, participant_type_from_string, "vehicle type");
      for (const auto& b : pj.at("behaviors"))
        p.behaviors.push_back(lookup<Action>(b.get<std::string>(), action_from_string, "action"));
      if (pj.contains("position"))
        p.relative_position = lookup<RelativePosition>(pj.at("position").get<std::string>(),
                                                       relative_position_from_string, "relative position");
      if (pj.contains("speed")) p.speed = pj.at("speed").get<double>();
      a.participants.push_back(std::move(p));
    }
    if (j.contains("notes")) a.notes = j.at("notes").get<std::vector<std::string>>();
    try {
      validate(a);
    } catch (const Error& e) {
      fail(ErrorKind::parse, e.what());
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed abstract scenario: ") + e.what());
  }
}

AbstractScenario load_abstract(const std::string& path) { return abstract_from_json(parse_json_file(path)); }

AnnotationLog annotation_from_json(const nlohmann::json& j) {
  try {
    AnnotationLog log;
    log.id = j.value("id", "");
    log.road = lookup<RoadType>(j.at("road").get<std::string>(), road_type_from_string, "road type");
    log.signal = lookup<Signal>(j.value("signal", std::string("none")), signal_from_string, "traffic signal");
    for (const auto& pj : j.value("participants", nlohmann::json::array())) {
      AnnotatedParticipant p;
      p.role = role_from(pj.at("role").get<std::string>());
      const std::string type = pj.value("type", std::string("none"));
      if (type != "none") p.type = lookup<ParticipantType>(type, participant_type_from_string, "vehicle type");
      p.behaviors = pj.at("behaviors").get<std::vector<std::string>>();
      if (pj.contains("position"))
        p.position = lookup<RelativePosition>(pj.at("position").get<std::string>(),
                                              relative_position_from_string, "relative position");
      if (pj.contains("speed")) p.speed = pj.at("speed").get<double>();
      for (const auto& w : pj.value("waypoints", nlohmann::json::array()))
        p.waypoints.push_back({w.at("t").get<double>(), w.at("x").get<double>(), w.at("y").get<double>()});
      log.participants.push_back(std::move(p));
    }
    return log;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, std::string("malformed annotation log: ") + e.what());
  }
}

AnnotationLog load_annotation(const std::string& path) { return annotation_from_json(parse_json_file(path)); }

std::string build_understanding_prompt(int frame_count) {
  require(frame_count >= 1, "frame_count must be at least 1");
  std::ostringstream p;
  p << "The attached " << frame_count
    << " key frame(s) come from one traffic recording and are ordered in time. "
       "Answer briefly and in a fixed structure. Report:\n"
       "1. the road types in view (straight road, intersection, T-junction);\n"
       "2. the driving behaviors of the ego vehicle, in order;\n"
       "3. the behaviors and positions of traffic participants relative to the ego vehicle, "
       "with each vehicle's type;\n"
       "4. traffic signals, if any;\n"
       "5. static obstacles, if any.";
  return p.str();
}

std::string format_instruction() {
  return "Use exactly one element per line:\n"
         "ROAD: <straight road | intersection | t junction>\n"
         "SIGNAL: <none | green light | red light | stop sign>\n"
         "EGO: <car | truck>; BEHAVIORS: <action>, <action>, ...\n"
         "NPC[<k>]: <car | truck>; BEHAVIORS: <action>, ...; POS: <position>\n"
         "PED[<k>]: pedestrian; BEHAVIORS: <action>, ...; POS: <position>\n"
         "Actions: follow lane, change left, change right, turn left, turn right, cross, accelerate, "
         "decelerate, brake, stop, drive through, walk along, walk across, stand.\n"
         "Positions: ahead, behind, left front, right front, left behind, right behind, "
         "left vertical, right vertical, opposite.";
}

namespace {

std::string words(std::string s) {
  std::string out;
  bool space = true;
  for (char c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) {
      if (!space) out.push_back(' ');
      space = true;
    } else {
      out.push_back(c);
      space = false;
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool has_word(const std::string& phrase, std::string_view w) {
  std::istringstream in(phrase);
  std::string tok;
  while (in >> tok)
    if (tok == w) return true;
  return false;
}

std::string fmt(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// Returns the action for a normalised phrase; `ambiguous` is set when a lane
// change without direction was mapped to change_left.
std::optional<Action> action_phrase(const std::string& w, Role role, bool& ambiguous) {
  ambiguous = false;
  static const std::map<std::string, Action> table = {
      {"follow lane", Action::follow_lane},   {"keep lane", Action::follow_lane},
      {"lane following", Action::follow_lane}, {"follow", Action::follow_lane},
      {"cross", Action::cross},                {"go straight", Action::cross},
      {"cross junction", Action::cross},       {"cross road", Action::cross},
      {"accelerate", Action::accelerate},      {"speed up", Action::accelerate},
      {"decelerate", Action::decelerate},      {"slow down", Action::decelerate},
      {"brake", Action::brake},                {"hard brake", Action::brake},
      {"stop", Action::stop},                  {"drive through", Action::drive_through},
      {"walk along", Action::walk_along},      {"walk across", Action::walk_across},
      {"stand", Action::stand},                {"stand still", Action::stand},
  };
  if (auto it = table.find(w); it != table.end()) return it->second;
  if (w == "wait") return role == Role::pedestrian ? Action::stand : Action::stop;
  if (has_word(w, "change")) {
    if (has_word(w, "left")) return Action::change_left;
    if (has_word(w, "right")) return Action::change_right;
    if (has_word(w, "lane") || w == "change") {
      ambiguous = true;
      return Action::change_left;
    }
  }
  if (has_word(w, "turn")) {
    if (has_word(w, "left")) return Action::turn_left;
    if (has_word(w, "right")) return Action::turn_right;
  }
  if (auto a = action_from_string(w)) return a;
  std::string underscored = w;
  std::replace(underscored.begin(), underscored.end(), ' ', '_');
  return action_from_string(underscored);
}

std::optional<RelativePosition> position_phrase(const std::string& w) {
  static const std::map<std::string, RelativePosition> table = {
      {"ahead", RelativePosition::ahead},
      {"front", RelativePosition::ahead},
      {"in front", RelativePosition::ahead},
      {"in front of ego", RelativePosition::ahead},
      {"behind", RelativePosition::behind},
      {"rear", RelativePosition::behind},
      {"back", RelativePosition::behind},
      {"left front", RelativePosition::left_front},
      {"front left", RelativePosition::left_front},
      {"right front", RelativePosition::right_front},
      {"front right", RelativePosition::right_front},
      {"left behind", RelativePosition::left_behind},
      {"left rear", RelativePosition::left_behind},
      {"rear left", RelativePosition::left_behind},
      {"right behind", RelativePosition::right_behind},
      {"right rear", RelativePosition::right_behind},
      {"rear right", RelativePosition::right_behind},
      {"left vertical", RelativePosition::left_vertical},
      {"vertical left", RelativePosition::left_vertical},
      {"left perpendicular", RelativePosition::left_vertical},
      {"right vertical", RelativePosition::right_vertical},
      {"vertical right", RelativePosition::right_vertical},
      {"right perpendicular", RelativePosition::right_vertical},
      {"opposite", RelativePosition::opposite},
      {"oncoming", RelativePosition::opposite},
      {"opposite direction", RelativePosition::opposite},
  };
  if (auto it = table.find(w); it != table.end()) return it->second;
  return std::nullopt;
}

std::optional<RoadType> road_phrase(const std::string& w) {
  static const std::map<std::string, RoadType> table = {
      {"straight", RoadType::straight},         {"straight road", RoadType::straight},
      {"road", RoadType::straight},             {"intersection", RoadType::intersection},
      {"crossroad", RoadType::intersection},    {"crossroads", RoadType::intersection},
      {"4 way intersection", RoadType::intersection},
      {"four way intersection", RoadType::intersection},
      {"t junction", RoadType::t_junction},     {"t intersection", RoadType::t_junction},
      {"tjunction", RoadType::t_junction},
  };
  if (auto it = table.find(w); it != table.end()) return it->second;
  return std::nullopt;
}

std::optional<Signal> signal_phrase(const std::string& w) {
  static const std::map<std::string, Signal> table = {
      {"none", Signal::none},           {"no signal", Signal::none},
      {"green light", Signal::light_green}, {"light green", Signal::light_green},
      {"red light", Signal::light_red}, {"light red", Signal::light_red},
      {"stop sign", Signal::stop_sign},
  };
  if (auto it = table.find(w); it != table.end()) return it->second;
  return std::nullopt;
}

std::optional<ParticipantType> type_phrase(const std::string& w) {
  if (w == "car" || w == "sedan" || w == "vehicle" || w == "suv") return ParticipantType::car;
  if (w == "truck" || w == "lorry" || w == "bus") return ParticipantType::truck;
  if (w == "pedestrian" || w == "person" || w == "none" || w.empty()) return ParticipantType::pedestrian;
  return std::nullopt;
}

std::string spoken(std::string token) {
  std::replace(token.begin(), token.end(), '_', ' ');
  return token;
}

std::string spoken_road(RoadType r) {
  switch (r) {
    case RoadType::straight: return "straight road";
    case RoadType::intersection: return "intersection";
    case RoadType::t_junction: return "t junction";
  }
  return "";
}

std::string spoken_signal(Signal s) {
  switch (s) {
    case Signal::none: return "none";
    case Signal::light_green: return "green light";
    case Signal::light_red: return "red light";
    case Signal::stop_sign: return "stop sign";
  }
  return "";
}

std::string join_behaviors(const std::vector<std::string>& b) {
  std::string out;
  for (std::size_t i = 0; i < b.size(); ++i) out += (i ? ", " : "") + spoken(b[i]);
  return out;
}

std::string base64(const std::vector<std::uint8_t>& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace

SceneDescription MockProvider::describe(const std::string&, const SceneInput& input) {
  require(input.log.has_value(), "mock provider needs an annotation log");
  const AnnotationLog& log = *input.log;
  std::ostringstream out;
  out << "ROAD: " << spoken_road(log.road) << "\n";
  out << "SIGNAL: " << spoken_signal(log.signal) << "\n";
  int npc = 0, ped = 0;
  for (const auto& p : log.participants) {
    if (p.role != Role::ego) continue;
    out << "EGO: " << (p.type ? to_string(*p.type) : "car") << "; BEHAVIORS: " << join_behaviors(p.behaviors)
        << "\n";
  }
  for (Role r : {Role::npc, Role::pedestrian}) {
    for (const auto& p : log.participants) {
      if (p.role != r) continue;
      if (r == Role::npc)
        out << "NPC[" << ++npc << "]: " << (p.type ? to_string(*p.type) : "car");
      else
        out << "PED[" << ++ped << "]: pedestrian";
      out << "; BEHAVIORS: " << join_behaviors(p.behaviors);
      if (p.position) out << "; POS: " << spoken(std::string(to_string(*p.position)));
      if (p.speed) out << "; SPEED: " << fmt(*p.speed);
      out << "\n";
    }
  }
  return {out.str(), Source::mock, 1};
}

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  const char* url = std::getenv("SCENFORGE_LLM_URL");
  if (!url || !*url) fail(ErrorKind::usage, "remote provider requires SCENFORGE_LLM_URL");
  c.url = url;
  if (const char* key = std::getenv("SCENFORGE_LLM_KEY")) c.api_key = key;
  return c;
}

SceneDescription RemoteProvider::describe(const std::string& prompt, const SceneInput& input) {
  // Split scheme://host[:port] from the request path.
  std::string base = config_.url, path = "/";
  if (const auto scheme = base.find("://"); scheme != std::string::npos) {
    if (const auto slash = base.find('/', scheme + 3); slash != std::string::npos) {
      path = base.substr(slash);
      base = base.substr(0, slash);
    }
  }
  nlohmann::json body;
  body["prompt"] = prompt;
  body["images"] = nlohmann::json::array();
  for (const auto& f : input.key_frames) body["images"].push_back(base64(flowkey::encode_pgm(f)));
  body["text"] = "";
  if (input.log) {
    MockProvider mock;
    body["text"] = mock.describe(prompt, input).raw_text;
  }
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
  std::string last_error = "no attempt made";
  const int attempts = std::max(1, config_.retries);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      httplib::Client client(base);
      const auto secs = static_cast<time_t>(config_.timeout_seconds);
      client.set_connection_timeout(secs, 0);
      client.set_read_timeout(secs, 0);
      client.set_write_timeout(secs, 0);
      auto res = client.Post(path, headers, payload, "application/json");
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP status " + std::to_string(res->status);
        continue;
      }
      const auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string() ||
          j["text"].get<std::string>().empty()) {
        last_error = "malformed response body";
        continue;
      }
      return {j["text"].get<std::string>(), Source::remote, attempt};
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  throw ProviderError("remote provider failed after " + std::to_string(attempts) + " attempts: " + last_error,
                      attempts);
}

SceneDescription describe_scene(Provider& provider, const SceneInput& input) {
  require(input.log.has_value() || !input.key_frames.empty(), "scene input is empty");
  const int frames = std::max<int>(1, static_cast<int>(input.key_frames.size()));
  return provider.describe(build_understanding_prompt(frames) + "\n\n" + format_instruction(), input);
}

AbstractScenario parse_description(const SceneDescription& desc) {
  require(!trim(desc.raw_text).empty(), "scene description is empty");
  AbstractScenario a;
  std::optional<RoadType> road;
  std::vector<ParticipantSpec> egos, npcs, peds;
  std::istringstream in(desc.raw_text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    // Fields are "KEY: value" separated by ';'.
    std::vector<std::pair<std::string, std::string>> fields;
    bool well_formed = true;
    std::istringstream fs(text);
    std::string field;
    while (std::getline(fs, field, ';')) {
      const auto colon = field.find(':');
      if (colon == std::string::npos) {
        well_formed = false;
        break;
      }
      std::string key = trim(std::string_view(field).substr(0, colon));
      std::transform(key.begin(), key.end(), key.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      fields.emplace_back(key, trim(std::string_view(field).substr(colon + 1)));
    }
    // "PED[1]: BEHAVIORS: ..." omits the type field.
    if (well_formed && !fields.empty()) {
      const std::string& v = fields[0].second;
      if (const auto colon = v.find(':'); colon != std::string::npos) {
        std::string key = trim(std::string_view(v).substr(0, colon));
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
        fields.insert(fields.begin() + 1, {key, trim(std::string_view(v).substr(colon + 1))});
        fields[0].second.clear();
      }
    }
    if (!well_formed || fields.empty()) {
      a.notes.push_back("unparsed line " + std::to_string(line_no) + ": " + text);
      continue;
    }
    const std::string& head = fields[0].first;
    if (head == "ROAD") {
      road = road_phrase(words(fields[0].second));
      if (!road) fail(ErrorKind::parse, "unknown road type '" + fields[0].second + "'");
      continue;
    }
    if (head == "SIGNAL") {
      auto s = signal_phrase(words(fields[0].second));
      if (!s) fail(ErrorKind::parse, "unknown traffic signal '" + fields[0].second + "'");
      a.traffic_signal = *s;
      continue;
    }
    Role role;
    if (head == "EGO")
      role = Role::ego;
    else if (head.rfind("NPC", 0) == 0)
      role = Role::npc;
    else if (head.rfind("PED", 0) == 0)
      role = Role::pedestrian;
    else {
      a.notes.push_back("unparsed line " + std::to_string(line_no) + ": " + text);
      continue;
    }
    ParticipantSpec p;
    p.role = role;
    const std::string type_words = words(fields[0].second);
    const auto type = type_phrase(type_words);
    if (!type) fail(ErrorKind::parse, "unknown vehicle type '" + fields[0].second + "'");
    if (role == Role::pedestrian) {
      if (*type != ParticipantType::pedestrian)
        fail(ErrorKind::parse, "pedestrian declared with vehicle type '" + fields[0].second + "'");
    } else {
      if (*type == ParticipantType::pedestrian)
        fail(ErrorKind::parse, std::string(to_string(role)) + " needs a vehicle type, got '" +
                                   fields[0].second + "'");
      p.vehicle_type = *type;
    }
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto& [key, value] = fields[i];
      if (key == "BEHAVIORS" || key == "BEHAVIOURS") {
        std::istringstream bs(value);
        std::string tok;
        while (std::getline(bs, tok, ',')) {
          const std::string w = words(tok);
          if (w.empty()) continue;
          bool ambiguous = false;
          const auto act = action_phrase(w, role, ambiguous);
          if (!act) fail(ErrorKind::parse, "unknown action '" + trim(tok) + "'");
          if (ambiguous)
            a.notes.push_back(std::string(to_string(role)) + ": '" + trim(tok) +
                              "' has no direction; assumed change_left");
          p.behaviors.push_back(*act);
        }
      } else if (key == "POS" || key == "POSITION") {
        p.relative_position = position_phrase(words(value));
        if (!p.relative_position) fail(ErrorKind::parse, "unknown relative position '" + value + "'");
      } else if (key == "SPEED") {
        double v = 0.0;
        const std::string t = trim(value);
        const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
        if (r.ec != std::errc{} || r.ptr != t.data() + t.size())
          fail(ErrorKind::parse, "malformed speed '" + value + "'");
        p.speed = v;
      } else {
        a.notes.push_back("line " + std::to_string(line_no) + ": ignored field " + key);
      }
    }
    (role == Role::ego ? egos : role == Role::npc ? npcs : peds).push_back(std::move(p));
  }
  if (!road) fail(ErrorKind::parse, "description names no road type");
  if (egos.empty()) fail(ErrorKind::parse, "description names no ego vehicle");
  if (egos.size() > 1) fail(ErrorKind::parse, "description names more than one ego vehicle");
  a.road_type = *road;
  a.participants = std::move(egos);
  a.participants.insert(a.participants.end(), npcs.begin(), npcs.end());
  a.participants.insert(a.participants.end(), peds.begin(), peds.end());
  try {
    validate(a);
  } catch (const Error& e) {
    fail(ErrorKind::parse, e.what());
  }
  return a;
}

AbstractScenario understand_scene(Provider& provider, const SceneInput& input, int max_reprompts) {
  require(input.log.has_value() || !input.key_frames.empty(), "scene input is empty");
  const int frames = std::max<int>(1, static_cast<int>(input.key_frames.size()));
  std::string prompt = build_understanding_prompt(frames) + "\n\n" + format_instruction();
  for (int round = 0;; ++round) {
    const SceneDescription desc = provider.describe(prompt, input);
    try {
      AbstractScenario a = parse_description(desc);
      if (input.log) a.id = input.log->id;
      return a;
    } catch (const Error& e) {
      if (round >= max_reprompts) throw;
      prompt += "\n\nThe previous answer could not be parsed (" + std::string(e.what()) +
                "). Answer again in exactly the format above.";
    }
  }
}

ActionSequence normalized_behaviors(const AnnotatedParticipant& p) {
  ActionSequence out;
  for (const auto& tok : p.behaviors) {
    bool ambiguous = false;
    const auto a = action_phrase(words(tok), p.role, ambiguous);
    if (!a) fail(ErrorKind::parse, "unknown action '" + tok + "'");
    out.push_back(*a);
  }
  return out;
}

}  // namespace scenforge::abstraction
