// Copyright 2026 The nbsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nbsim/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "nbsim/attributes.hpp"
#include "nbsim/error.hpp"
#include "nbsim/update_round.hpp"

namespace nbsim {

std::string_view to_string(ScriptAction a) {
  switch (a) {
    case ScriptAction::kDownload: return "download";
    case ScriptAction::kUp: return "up";
    case ScriptAction::kDown: return "down";
    case ScriptAction::kSend: return "send";
    case ScriptAction::kSubdivide: return "subdivide";
    case ScriptAction::kCommit: return "commit";
    case ScriptAction::kSet: return "set";
    case ScriptAction::kRound: return "round";
    case ScriptAction::kRefresh: return "refresh";
  }
  return "?";
}

std::string Scenario::display_name(NodeAddress a) const {
  for (const auto& [name, addr] : aliases) {
    if (addr == a) return name;
  }
  return a.to_string();
}

bool ScenarioReport::passed() const {
  return std::all_of(results.begin(), results.end(),
                     [](const ExpectationResult& r) { return r.passed; });
}

namespace {

constexpr std::uint32_t kScriptChannel = 0x534352;
constexpr std::uint32_t kTickChannel = 0x54434b;
constexpr std::uint32_t kDeadlineChannel = 0x444c4e;
constexpr std::uint32_t kIntroExpiryChannel = 0x495845;
constexpr std::uint32_t kUserChannel = 0x555352;
constexpr std::uint32_t kProposalChannel = 0x50524f;
constexpr std::uint32_t kAckChannel = 0x41434b;

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::optional<ScriptAction> parse_action(std::string_view s) {
  for (auto a : {ScriptAction::kDownload, ScriptAction::kUp,
                 ScriptAction::kDown, ScriptAction::kSend,
                 ScriptAction::kSubdivide, ScriptAction::kCommit,
                 ScriptAction::kSet, ScriptAction::kRound,
                 ScriptAction::kRefresh}) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

template <typename T>
T parse_number(std::size_t line, const std::string& key,
               const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || p != end) {
    throw ParseError(line, "bad number for " + key + ": '" + text + "'");
  }
  return v;
}

// from_chars for double is missing from older libstdc++ builds.
double parse_real(std::size_t line, const std::string& key,
                  const std::string& text) {
  std::istringstream in(text);
  double v = 0;
  char extra = 0;
  if (!(in >> v) || (in >> extra)) {
    throw ParseError(line, "bad number for " + key + ": '" + text + "'");
  }
  return v;
}

std::map<std::string, std::string> parse_pairs(
    std::size_t line, std::vector<std::string>::const_iterator first,
    std::vector<std::string>::const_iterator last) {
  std::map<std::string, std::string> out;
  for (auto it = first; it != last; ++it) {
    const auto eq = it->find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParseError(line, "expected key=value, got '" + *it + "'");
    }
    auto key = it->substr(0, eq);
    if (!out.emplace(key, it->substr(eq + 1)).second) {
      throw ParseError(line, "repeated key '" + key + "'");
    }
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string name) { sc_.name = std::move(name); }

  void feed(std::size_t line, std::string text) {
    if (auto hash = text.find('#'); hash != std::string::npos) {
      text.erase(hash);
    }
    const auto toks = split_ws(text);
    if (toks.empty()) return;
    const auto& head = toks.front();
    if (head == "node") {
      node(line, toks);
    } else if (head == "config") {
      config(line, parse_pairs(line, toks.begin() + 1, toks.end()));
    } else if (head == "expect" || head == "expect-not") {
      expect(line, toks, text);
    } else if (head.rfind("at=", 0) == 0) {
      event(line, parse_pairs(line, toks.begin(), toks.end()));
    } else {
      throw ParseError(line, "unknown statement '" + head + "'");
    }
  }

  Scenario finish() {
    std::stable_sort(sc_.events.begin(), sc_.events.end(),
                     [](const ScriptLine& a, const ScriptLine& b) {
                       return a.at < b.at;
                     });
    std::set<NodeAddress> downloaded;
    for (const auto& ev : sc_.events) {
      if (ev.action == ScriptAction::kDownload) {
        downloaded.insert(ev.addr);
      } else if (!downloaded.contains(ev.addr)) {
        throw ParseError(ev.line, "event '" +
                                      std::string(to_string(ev.action)) +
                                      "' for " + sc_.display_name(ev.addr) +
                                      " before its download");
      }
    }
    return std::move(sc_);
  }

 private:
  NodeAddress resolve(std::size_t line, const std::string& text) const {
    if (auto it = sc_.aliases.find(text); it != sc_.aliases.end()) {
      return it->second;
    }
    if (auto a = NodeAddress::try_parse(text)) return *a;
    throw ParseError(line, "unknown node '" + text + "'");
  }

  void node(std::size_t line, const std::vector<std::string>& toks) {
    if (toks.size() != 3) {
      throw ParseError(line, "expected: node <name> <address>");
    }
    if (NodeAddress::try_parse(toks[1])) {
      throw ParseError(line, "node name looks like an address: " + toks[1]);
    }
    auto addr = NodeAddress::try_parse(toks[2]);
    if (!addr) throw ParseError(line, "bad address '" + toks[2] + "'");
    for (const auto& [n, a] : sc_.aliases) {
      if (a == *addr) {
        throw ParseError(line, toks[2] + " already named " + n);
      }
    }
    if (!sc_.aliases.emplace(toks[1], *addr).second) {
      throw ParseError(line, "node '" + toks[1] + "' declared twice");
    }
  }

  void config(std::size_t line, const std::map<std::string, std::string>& kv) {
    auto& c = sc_.config;
    for (const auto& [k, v] : kv) {
      if (k == "critical_mass") {
        c.critical_mass = parse_number<std::size_t>(line, k, v);
      } else if (k == "cluster_size") {
        c.cluster_size = parse_number<std::size_t>(line, k, v);
        if (c.cluster_size == 0) throw ParseError(line, "cluster_size is 0");
      } else if (k == "min_clients") {
        c.router_criteria.min_clients = parse_number<std::size_t>(line, k, v);
      } else if (k == "min_uptime") {
        c.router_criteria.min_uptime_fraction = parse_real(line, k, v);
      } else if (k == "min_capacity") {
        c.router_criteria.min_capacity_bps = parse_real(line, k, v);
      } else if (k == "beacon_interval") {
        c.beacon_interval = {parse_number<std::uint64_t>(line, k, v)};
        if (c.beacon_interval.units == 0) {
          throw ParseError(line, "beacon_interval is 0");
        }
      } else if (k == "beacon_timeout") {
        c.beacon_timeout = {parse_number<std::uint64_t>(line, k, v)};
      } else if (k == "intro_timeout") {
        c.intro_timeout = {parse_number<std::uint64_t>(line, k, v)};
      } else if (k == "excerpt_cap") {
        c.excerpt_cap = parse_number<std::size_t>(line, k, v);
      } else if (k == "horizon") {
        c.horizon = VirtualTime{parse_number<std::uint64_t>(line, k, v)};
      } else {
        throw ParseError(line, "unknown config key '" + k + "'");
      }
    }
    try {
      c.router_criteria.validate();
    } catch (const Error& e) {
      throw ParseError(line, e.what());
    }
  }

  void expect(std::size_t line, const std::vector<std::string>& toks,
              const std::string& text) {
    if (toks.size() < 2) throw ParseError(line, "expect needs a name");
    Expectation ex;
    ex.line = line;
    ex.negated = toks[0] == "expect-not";
    ex.what = toks[1];
    ex.args = parse_pairs(line, toks.begin() + 2, toks.end());
    for (auto& [k, v] : ex.args) {
      if (k == "count" || k == "before" || k == "after") {
        parse_number<std::uint64_t>(line, k, v);
      } else if (auto it = sc_.aliases.find(v); it != sc_.aliases.end()) {
        v = it->second.to_string();
      }
    }
    const auto b = text.find_first_not_of(" \t");
    const auto e = text.find_last_not_of(" \t\r");
    ex.text = text.substr(b, e - b + 1);
    sc_.expectations.push_back(std::move(ex));
  }

  void event(std::size_t line, std::map<std::string, std::string> kv) {
    ScriptLine ev;
    ev.line = line;
    ev.at = {parse_number<std::uint64_t>(line, "at", kv.at("at"))};
    kv.erase("at");
    auto take = [&](const char* key) {
      auto it = kv.find(key);
      if (it == kv.end()) {
        throw ParseError(line, std::string("missing ") + key + "=");
      }
      auto v = it->second;
      kv.erase(it);
      return v;
    };
    const auto name = take("event");
    auto action = parse_action(name);
    if (!action) throw ParseError(line, "unknown event '" + name + "'");
    ev.action = *action;
    ev.addr = resolve(line, take("addr"));

    auto need = [&](std::initializer_list<const char*> keys) {
      for (const auto* k : keys) {
        if (!kv.contains(k)) {
          throw ParseError(line, name + " needs " + k + "=");
        }
      }
    };
    auto allow = [&](std::initializer_list<const char*> keys) {
      for (const auto& [k, v] : kv) {
        if (std::none_of(keys.begin(), keys.end(),
                         [&](const char* a) { return k == a; })) {
          throw ParseError(line, "unexpected " + k + "= for " + name);
        }
      }
    };
    switch (ev.action) {
      case ScriptAction::kDownload:
        allow({"domain", "uptime", "capacity", "metric"});
        if (kv.contains("uptime")) parse_real(line, "uptime", kv["uptime"]);
        if (kv.contains("capacity")) {
          parse_real(line, "capacity", kv["capacity"]);
        }
        if (kv.contains("metric")) parse_real(line, "metric", kv["metric"]);
        break;
      case ScriptAction::kSend:
        need({"to"});
        allow({"to", "payload"});
        kv["to"] = resolve(line, kv["to"]).to_string();
        break;
      case ScriptAction::kCommit:
        need({"key", "value"});
        allow({"key", "value", "timeout"});
        if (kv.contains("timeout")) {
          parse_number<std::uint64_t>(line, "timeout", kv["timeout"]);
        }
        break;
      case ScriptAction::kSet:
        need({"key", "value"});
        allow({"key", "value", "scope", "class"});
        try {
          if (kv.contains("scope")) AttributeScope::parse(kv["scope"]);
          if (kv.contains("class")) parse_update_class(kv["class"]);
        } catch (const Error& e) {
          throw ParseError(line, e.what());
        }
        break;
      case ScriptAction::kRefresh:
        allow({"span"});
        if (kv.contains("span")) {
          const auto& s = kv["span"];
          const auto dash = s.find('-');
          if (dash == std::string::npos) {
            throw ParseError(line, "span must be <first>-<last>");
          }
          const auto lo = resolve(line, s.substr(0, dash));
          const auto hi = resolve(line, s.substr(dash + 1));
          if (hi < lo) throw ParseError(line, "span is reversed");
          kv["span"] = lo.to_string() + "-" + hi.to_string();
        }
        break;
      default:
        allow({});
    }
    ev.args = std::move(kv);
    sc_.events.push_back(std::move(ev));
  }

  Scenario sc_;
};

// ---------------------------------------------------------------------------

struct CommitSlot {
  PendingCommit commit;
  std::size_t hood;
};

struct RoundSlot {
  UpdateRound round;
  NodeAddress initiator;
  bool reported = false;
};

class Runner {
 public:
  Runner(const Scenario& sc, std::uint64_t seed)
      : sc_(sc),
        world_(DiscoveryConfig{sc.config.excerpt_cap, sc.config.intro_timeout,
                               sc.config.router_criteria,
                               sc.config.beacon_timeout}),
        engine_(seed) {
    VirtualTime last{};
    for (const auto& ev : sc.events) last = std::max(last, ev.at);
    // Long enough for a router that failed at the last event to be
    // replaced and heard from.
    const auto settle = 2 * sc.config.beacon_timeout.units +
                        3 * sc.config.beacon_interval.units;
    tick_until_ = sc.config.horizon.value_or(VirtualTime{last.units + settle});
  }

  ScenarioReport run() {
    for (std::size_t i = 0; i < sc_.events.size(); ++i) {
      const auto& line = sc_.events[i];
      SimEvent ev;
      ev.at = line.at;
      ev.target = line.addr;
      ev.channel = kScriptChannel;
      ev.ref = i;
      ev.kind = line.action == ScriptAction::kDown     ? EventKind::kNodeDown
                : line.action == ScriptAction::kUp ||
                        line.action == ScriptAction::kDownload
                    ? EventKind::kNodeUp
                    : EventKind::kTimer;
      ev.detail = std::string(to_string(line.action));
      engine_.schedule(std::move(ev));
    }
    engine_.run([this](const SimEvent& ev) { dispatch(ev); },
                sc_.config.horizon);

    ScenarioReport report;
    report.trace = engine_.trace();
    report.observations = obs_;
    for (auto h : world_.live_neighborhoods()) {
      report.neighborhoods.push_back(world_.neighborhood(h).map.addresses());
      report.routers.push_back(world_.router_of(h));
    }
    for (const auto& ex : sc_.expectations) {
      report.results.push_back(evaluate(ex));
    }
    return report;
  }

 private:
  void observe(std::string what, NodeAddress subject,
               std::optional<NodeAddress> object = {},
               std::map<std::string, std::string> fields = {},
               bool mirror = true) {
    if (mirror) {
      std::string text = what;
      if (object) text += " to=" + object->to_string();
      for (const auto& [k, v] : fields) text += " " + k + "=" + v;
      engine_.note(subject, std::move(text));
    }
    obs_.push_back({engine_.now(), std::move(what), subject, object,
                    std::move(fields)});
  }

  void dispatch(const SimEvent& ev) {
    switch (ev.kind) {
      case EventKind::kBeacon:
        on_beacon(ev);
        return;
      case EventKind::kNote:
        return;
      default:
        break;
    }
    switch (ev.channel) {
      case kScriptChannel: return script(sc_.events.at(ev.ref));
      case kTickChannel: return tick(ev.ref);
      case kDeadlineChannel: return commit_deadline(ev.ref);
      case kIntroExpiryChannel: return intro_expiry();
      case kUserChannel:
        if (world_.running(ev.target)) {
          observe("delivered", ev.source, ev.target, {}, false);
        } else {
          observe("dropped", ev.source, ev.target, {}, true);
        }
        return;
      case kIntroChannel:
        if (world_.running(ev.target)) {
          observe("introduced", ev.source, ev.target, {}, false);
        }
        return;
      case kProposalChannel: return on_proposal(ev);
      case kAckChannel: return on_ack(ev);
      case UpdateRound::kChannel: return on_round_message(ev);
      default: return;
    }
  }

  void script(const ScriptLine& line) {
    switch (line.action) {
      case ScriptAction::kDownload: return download(line);
      case ScriptAction::kUp: return up(line.addr);
      case ScriptAction::kDown:
        world_.set_running(line.addr, false);
        return;
      case ScriptAction::kSend: {
        const auto to = NodeAddress::parse(line.args.at("to"));
        if (!world_.running(line.addr)) {
          observe("send-skipped", line.addr, to);
          return;
        }
        auto it = line.args.find("payload");
        engine_.send(line.addr, to, kUserChannel, 0,
                     it == line.args.end() ? "payload" : it->second);
        return;
      }
      case ScriptAction::kSubdivide: {
        const auto hood = *world_.neighborhood_of(line.addr);
        split(hood, sc_.config.critical_mass == 0
                        ? world_.neighborhood(hood).map.size() / 2
                        : sc_.config.critical_mass);
        return;
      }
      case ScriptAction::kCommit: return commit(line);
      case ScriptAction::kSet: return set(line);
      case ScriptAction::kRound: return round(line.addr);
      case ScriptAction::kRefresh: return refresh(line);
    }
  }

  void download(const ScriptLine& line) {
    NodeRecord rec;
    rec.address = line.addr;
    auto get = [&](const char* k, const char* def) {
      auto it = line.args.find(k);
      return it == line.args.end() ? std::string(def) : it->second;
    };
    rec.domain = get("domain", "isp.example");
    rec.uptime_fraction = parse_real(line.line, "uptime", get("uptime", "0.5"));
    rec.link_capacity_bps =
        parse_real(line.line, "capacity", get("capacity", "56000"));
    rec.metric = parse_real(line.line, "metric", get("metric", "0"));
    try {
      rec.validate();
    } catch (const Error& e) {
      throw ParseError(line.line, e.what());
    }

    auto excerpt = world_.registry().register_download(line.addr, rec.domain,
                                                       engine_.now());
    world_.add_instance(rec);
    attrs_.try_emplace(line.addr);
    const auto out = bootstrap(world_, line.addr, excerpt, engine_);
    for (const auto& a : out.attempts) {
      if (!a.success) observe("connect-failed", line.addr, a.target, {}, false);
    }
    if (out.contact) {
      std::map<std::string, std::string> f;
      if (out.kind == JoinKind::kViaRouter) f["via"] = "router";
      observe("connect", line.addr, out.contact, std::move(f), false);
    } else {
      observe(std::string(to_string(out.kind)), line.addr, {}, {}, false);
    }
    for (auto id : out.queued) {
      const auto& intro = world_.introductions().pending().at(id);
      observe("queued", line.addr, intro.target, {}, false);
      SimEvent t;
      t.at = intro.deadline + VirtualTime{1};
      t.target = line.addr;
      t.channel = kIntroExpiryChannel;
      t.ref = id;
      t.detail = "intro-deadline";
      engine_.schedule(std::move(t));
    }
    settle(*world_.neighborhood_of(line.addr));
  }

  void up(NodeAddress a) {
    world_.set_running(a, true);
    for (const auto& r : world_.introductions().on_reactivate(a, engine_.now())) {
      if (r.outcome == IntroductionOutcome::kDelivered) {
        observe("intro-delivered", r.intro.sender, r.intro.target);
        engine_.send(r.intro.sender, r.intro.target, kIntroChannel, r.intro.id,
                     r.intro.payload);
      } else {
        observe("intro-expired", r.intro.sender, r.intro.target);
      }
    }
    if (auto h = world_.neighborhood_of(a)) {
      auto& map = world_.neighborhood(*h).map;
      if (const auto* rec = map.find(a); rec && !rec->active) {
        map.set_active(a, true);
        observe("rejoined", a);
      }
      settle(*h);
    }
  }

  // Applies automatic subdivision and router election after a membership
  // change.
  void settle(std::size_t hood) {
    if (sc_.config.critical_mass > 0) {
      split(hood, sc_.config.critical_mass);
    } else {
      elect(hood);
    }
  }

  void split(std::size_t hood, std::size_t critical_mass) {
    std::vector<std::size_t> todo{hood};
    while (!todo.empty()) {
      const auto h = todo.back();
      todo.pop_back();
      const auto& map = world_.neighborhood(h).map;
      if (map.empty()) continue;
      const auto first = map.members().front().address;
      const auto size = map.size();
      if (auto high = world_.subdivide(h, critical_mass)) {
        const auto& hm = world_.neighborhood(*high).map;
        observe("subdivided", first, hm.members().front().address,
                {{"size", std::to_string(size)},
                 {"low", std::to_string(world_.neighborhood(h).map.size())},
                 {"high", std::to_string(hm.size())}});
        todo.push_back(h);
        todo.push_back(*high);
      } else {
        elect(h);
      }
    }
  }

  void elect(std::size_t hood) {
    if (world_.neighborhood(hood).retired) return;
    if (auto r = world_.ensure_router(hood, engine_.now())) {
      observe("router-elected", *r);
    }
    if (world_.router_of(hood) && !ticking_.contains(hood)) {
      ticking_.insert(hood);
      schedule_tick(hood);
    }
  }

  void schedule_tick(std::size_t hood) {
    const auto at = engine_.now() + sc_.config.beacon_interval;
    if (at > tick_until_) {
      ticking_.erase(hood);
      return;
    }
    SimEvent t;
    t.at = at;
    t.channel = kTickChannel;
    t.ref = hood;
    t.detail = "beacon-tick";
    if (auto r = world_.router_of(hood)) t.target = *r;
    engine_.schedule(std::move(t));
  }

  void tick(std::size_t hood) {
    auto& h = world_.neighborhood(hood);
    if (h.retired || !h.monitor.router()) {
      ticking_.erase(hood);
      return;
    }
    const auto router = *h.monitor.router();
    if (world_.running(router)) {
      SimEvent b;
      b.at = engine_.now();
      b.kind = EventKind::kBeacon;
      b.target = router;
      b.source = router;
      b.ref = hood;
      b.detail = "beacon";
      engine_.schedule(std::move(b));
    }
    if (auto ho = h.monitor.check(h.map, engine_.now())) {
      observe("beacon-expired", ho->failed);
      world_.directory().set_router(ho->failed, false);
      if (ho->replacement) {
        observe("holdback", *ho->replacement);
        observe("router-assumed", *ho->replacement, {},
                {{"failed", ho->failed.to_string()}});
        const auto& rec = world_.instance(*ho->replacement).record;
        world_.directory().advertise(*ho->replacement, rec.domain, true);
      } else {
        observe("router-lapsed", ho->failed);
      }
    }
    if (!h.monitor.router()) {
      ticking_.erase(hood);
      return;
    }
    schedule_tick(hood);
  }

  void on_beacon(const SimEvent& ev) {
    auto& h = world_.neighborhood(ev.ref);
    const bool first = h.monitor.holding_back(engine_.now());
    if (h.monitor.on_beacon(ev.source, engine_.now()) && first) {
      observe("router-active", ev.source);
    }
  }

  void intro_expiry() {
    for (const auto& r : world_.introductions().expire(engine_.now())) {
      observe("intro-expired", r.intro.sender, r.intro.target);
    }
  }

  void commit(const ScriptLine& line) {
    const auto hood = *world_.neighborhood_of(line.addr);
    const auto group = world_.neighborhood(hood).map.active_addresses();
    if (!world_.running(line.addr) ||
        !std::binary_search(group.begin(), group.end(), line.addr)) {
      observe("commit-refused", line.addr);
      return;
    }
    VirtualTime timeout{50};
    if (auto it = line.args.find("timeout"); it != line.args.end()) {
      timeout = {parse_number<std::uint64_t>(line.line, "timeout", it->second)};
    }
    const auto id = next_commit_++;
    auto [it, ok] = commits_.emplace(
        id, CommitSlot{propose_commit(line.addr, group, line.args.at("key"),
                                      line.args.at("value"), engine_.now(),
                                      timeout),
                       hood});
    auto& c = it->second.commit;
    observe("commit-proposed", line.addr, {},
            {{"key", c.key()}, {"group", std::to_string(group.size())}});
    if (c.committed()) {
      committed(id, "full");
      return;
    }
    for (auto m : group) {
      if (m != line.addr) engine_.send(line.addr, m, kProposalChannel, id, "propose");
    }
    SimEvent t;
    t.at = c.deadline();
    t.target = line.addr;
    t.channel = kDeadlineChannel;
    t.ref = id;
    t.detail = "commit-deadline";
    engine_.schedule(std::move(t));
  }

  void on_proposal(const SimEvent& ev) {
    if (!world_.running(ev.target)) return;
    engine_.send(ev.target, ev.source, kAckChannel, ev.ref, "ack");
  }

  void on_ack(const SimEvent& ev) {
    auto& slot = commits_.at(ev.ref);
    if (!world_.running(ev.target)) return;
    if (slot.commit.ack(ev.source, engine_.now()) == AckResult::kAccepted &&
        slot.commit.committed()) {
      committed(ev.ref, "full");
    }
  }

  void commit_deadline(std::uint64_t id) {
    auto& slot = commits_.at(id);
    auto& c = slot.commit;
    if (c.resolved()) return;
    if (!world_.running(c.proposer())) {
      c.abandon(engine_.now());
      observe("commit-expired", c.proposer(), {}, {{"key", c.key()}});
      return;
    }
    if (c.tick(engine_.now())) committed(id, "timeout");
  }

  void committed(std::uint64_t id, const char* mode) {
    auto& slot = commits_.at(id);
    const auto& c = slot.commit;
    std::string absent;
    for (auto a : c.absentees()) {
      absent += (absent.empty() ? "" : ",") + a.to_string();
    }
    observe("committed", c.proposer(), {},
            {{"key", c.key()},
             {"value", c.value()},
             {"acks", std::to_string(c.acks().size())},
             {"absent", absent.empty() ? "-" : absent},
             {"mode", mode}});
    auto& map = world_.neighborhood(slot.hood).map;
    for (auto a : c.absentees()) {
      if (map.contains(a)) map.set_active(a, false);
      observe("flagged-offline", a);
    }
    auto& list = attrs_[c.proposer()];
    AttributeEntry e;
    e.key = c.key();
    e.value = c.value();
    e.owner = c.proposer();
    if (const auto* old = list.find(e.key, e.owner)) {
      e.scope = old->scope;
      e.update_class = old->update_class;
      e.version = old->version + 1;
    }
    list.put(std::move(e));
  }

  void set(const ScriptLine& line) {
    auto& list = attrs_[line.addr];
    AttributeEntry e;
    e.key = line.args.at("key");
    e.value = line.args.at("value");
    e.owner = line.addr;
    if (auto it = line.args.find("scope"); it != line.args.end()) {
      e.scope = AttributeScope::parse(it->second);
    }
    if (auto it = line.args.find("class"); it != line.args.end()) {
      e.update_class = parse_update_class(it->second);
    }
    if (const auto* old = list.find(e.key, e.owner)) {
      e.version = old->version + 1;
      e.scope = old->scope;
    }
    list.put(std::move(e));
    observe("set", line.addr, {}, {{"key", line.args.at("key")}});
  }

  void round(NodeAddress initiator) {
    const auto hood = *world_.neighborhood_of(initiator);
    const auto& map = world_.neighborhood(hood).map;
    if (map.active_count() == 0) {
      observe("round-skipped", initiator);
      return;
    }
    auto plan = form_clusters(map, sc_.config.cluster_size);
    std::map<NodeAddress, AttributeList> lists;
    for (auto m : plan.members()) lists[m] = attrs_[m];
    const auto id = next_round_++;
    auto [it, ok] =
        rounds_.emplace(id, RoundSlot{UpdateRound(std::move(plan),
                                                  std::move(lists), id),
                                      initiator});
    auto& r = it->second.round;
    for (auto m : r.plan().members()) r.set_live(m, world_.running(m));
    observe("round-started", initiator, {},
            {{"members", std::to_string(r.plan().member_count())},
             {"clusters", std::to_string(r.plan().clusters.size())}});
    r.begin(engine_);
    report_round(it->second);
  }

  void on_round_message(const SimEvent& ev) {
    auto it = rounds_.find(static_cast<std::uint32_t>(ev.ref >> 40));
    if (it == rounds_.end()) return;
    it->second.round.deliver(ev, engine_);
    report_round(it->second);
  }

  void report_round(RoundSlot& slot) {
    auto& r = slot.round;
    if (slot.reported || r.phase() != RoundPhase::kDone) return;
    slot.reported = true;
    bool converged = true;
    for (const auto& [m, list] : r.lists()) {
      if (r.stale().contains(m) || !world_.running(m)) continue;
      attrs_[m] = list;
      converged = converged && list == r.neighborhood_list();
    }
    observe("round-done", slot.initiator, {},
            {{"messages", std::to_string(r.messages_sent())},
             {"stale", std::to_string(r.stale().size())},
             {"converged", converged ? "yes" : "no"}});
  }

  void refresh(const ScriptLine& line) {
    const auto hood = *world_.neighborhood_of(line.addr);
    AddressRange span{NodeAddress(line.addr.value() & 0xffffff00u),
                      NodeAddress(line.addr.value() | 0xffu)};
    if (auto it = line.args.find("span"); it != line.args.end()) {
      const auto dash = it->second.find('-');
      span = {NodeAddress::parse(it->second.substr(0, dash)),
              NodeAddress::parse(it->second.substr(dash + 1))};
    }
    if (world_.router_of(hood) != line.addr) {
      observe("refresh-refused", line.addr);
      return;
    }
    std::vector<NodeAddress> added;
    router_refresh(world_, hood, line.addr, span, &added);
    for (auto a : added) observe("refresh-added", line.addr, a);
    settle(hood);
  }

  ExpectationResult evaluate(const Expectation& ex) const {
    ExpectationResult res{ex, false, 0};
    auto arg = [&](const char* k) -> std::optional<NodeAddress> {
      auto it = ex.args.find(k);
      if (it == ex.args.end()) return std::nullopt;
      return NodeAddress::try_parse(it->second);
    };
    if (ex.what == "current-router") {
      const auto a = arg("addr");
      bool holds = false;
      if (a) {
        if (auto h = world_.neighborhood_of(*a)) {
          holds = world_.router_of(*h) == *a;
        }
      }
      res.matches = holds ? 1 : 0;
      res.passed = holds != ex.negated;
      return res;
    }
    if (ex.what == "same-neighborhood") {
      const auto a = arg("a");
      const auto b = arg("b");
      bool holds = false;
      if (a && b) {
        const auto ha = world_.neighborhood_of(*a);
        holds = ha && ha == world_.neighborhood_of(*b);
      }
      res.matches = holds ? 1 : 0;
      res.passed = holds != ex.negated;
      return res;
    }
    if (ex.what == "member") {
      const auto a = arg("addr");
      const bool holds = a && world_.neighborhood_of(*a).has_value();
      res.matches = holds ? 1 : 0;
      res.passed = holds != ex.negated;
      return res;
    }

    std::optional<std::size_t> count;
    for (const auto& o : obs_) {
      if (o.what != ex.what) continue;
      bool ok = true;
      for (const auto& [k, v] : ex.args) {
        if (k == "count") {
          continue;
        } else if (k == "before") {
          ok = ok && o.at.units < std::stoull(v);
        } else if (k == "after") {
          ok = ok && o.at.units > std::stoull(v);
        } else if (k == "from" || k == "addr") {
          ok = ok && o.subject.to_string() == v;
        } else if (k == "to") {
          ok = ok && o.object && o.object->to_string() == v;
        } else {
          auto it = o.fields.find(k);
          ok = ok && it != o.fields.end() && it->second == v;
        }
      }
      if (ok) ++res.matches;
    }
    if (auto it = ex.args.find("count"); it != ex.args.end()) {
      count = std::stoul(it->second);
    }
    const bool holds = count ? res.matches == *count : res.matches > 0;
    res.passed = holds != ex.negated;
    return res;
  }

  const Scenario& sc_;
  Deployment world_;
  Engine engine_;
  VirtualTime tick_until_;
  std::set<std::size_t> ticking_;
  std::vector<Observation> obs_;
  std::map<NodeAddress, AttributeList> attrs_;
  std::map<std::uint64_t, CommitSlot> commits_;
  std::uint64_t next_commit_ = 1;
  std::map<std::uint32_t, RoundSlot> rounds_;
  std::uint32_t next_round_ = 1;
};

}  // namespace

Scenario parse_scenario(std::istream& in, std::string name) {
  Parser p(std::move(name));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) p.feed(++n, line);
  return p.finish();
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  return parse_scenario(in, path.stem().string());
}

ScenarioReport run_scenario(const Scenario& scenario, std::uint64_t seed) {
  return Runner(scenario, seed).run();
}

namespace {

// Replaces whole dotted quads that have an alias.
std::string alias_addresses(const Scenario& sc, const std::string& text) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool boundary = i == 0 || text[i - 1] == '=' || text[i - 1] == ' ' ||
                          text[i - 1] == ',';
    if (boundary && std::isdigit(static_cast<unsigned char>(text[i]))) {
      auto j = text.find_first_of(" ,", i);
      if (j == std::string::npos) j = text.size();
      const auto token = text.substr(i, j - i);
      if (auto a = NodeAddress::try_parse(token)) {
        out += sc.display_name(*a);
      } else {
        out += token;
      }
      i = j;
      continue;
    }
    out += text[i++];
  }
  return out;
}

}  // namespace

std::string format_report(const Scenario& scenario,
                          const ScenarioReport& report) {
  std::ostringstream out;
  const NameResolver names = [&](NodeAddress a) {
    return scenario.display_name(a);
  };
  auto trace = report.trace;
  if (!scenario.aliases.empty()) {
    for (auto& ev : trace.events) {
      ev.detail = alias_addresses(scenario, ev.detail);
    }
  }
  out << "scenario " << (scenario.name.empty() ? "-" : scenario.name) << '\n';
  out << "trace:\n" << format_trace(trace, names);
  out << "neighborhoods:\n";
  for (std::size_t i = 0; i < report.neighborhoods.size(); ++i) {
    out << "  [" << i << "] router=";
    out << (report.routers[i] ? names(*report.routers[i]) : "-") << " members=";
    const auto& ms = report.neighborhoods[i];
    for (std::size_t j = 0; j < ms.size(); ++j) {
      out << (j ? "," : "") << names(ms[j]);
    }
    out << '\n';
  }
  out << "expectations:\n";
  for (const auto& r : report.results) {
    out << (r.passed ? "  PASS" : "  FAIL") << " line " << r.expectation.line
        << ": " << r.expectation.text << " (matches=" << r.matches << ")\n";
  }
  out << (report.passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace nbsim
