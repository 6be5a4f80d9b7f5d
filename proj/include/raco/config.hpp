#ifndef RACO_CONFIG_HPP
#define RACO_CONFIG_HPP

// Line-oriented configuration files:
//
//   # comment
//   [instance]
//   W = 40 MHz
//   noise = -169 dBm/Hz
//
// Sections: instance, scenario, channel, experiment, cccp, ibcd, af. Every
// physical value may carry a unit suffix and is stored in SI. Unknown
// sections or keys are errors. render() writes a file that parses back to
// the same Config.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "raco/csv.hpp"
#include "raco/errors.hpp"
#include "raco/harness.hpp"
#include "raco/model.hpp"

namespace raco {

inline std::string to_string(Relaying r) { return r == Relaying::hybrid ? "hybrid" : "time-division"; }

inline Relaying relaying_from_string(const std::string& s) {
  if (s == "hybrid") return Relaying::hybrid;
  if (s == "time-division") return Relaying::time_division;
  throw InvalidInstance("unknown relaying mode '" + s + "'");
}

struct Config {
  ExperimentConfig experiment;
  std::optional<ProblemInstance> instance;  // set when the file has an [instance] section

  bool operator==(const Config&) const = default;
};

namespace config_detail {

enum class Quantity { plain, frequency, power, bits, distance, gain, level_db, noise_density };

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Number {
  double value = 0.0;
  std::string unit;
};

inline Number split_number(const std::string& text, int line) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  Number n;
  const auto res = std::from_chars(first, last, n.value);
  if (res.ec != std::errc() || !std::isfinite(n.value)) throw ParseError("'" + text + "' is not a number", line);
  n.unit = trim(std::string_view(res.ptr, static_cast<std::size_t>(last - res.ptr)));
  return n;
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

inline double to_si(Quantity q, const Number& n, int line) {
  const double x = n.value;
  const std::string& u = n.unit;
  auto bad = [&]() -> double { throw UnitError("unit '" + u + "' does not fit this key", line); };
  switch (q) {
    case Quantity::plain:
      return u.empty() ? x : bad();
    case Quantity::frequency:
      if (u.empty() || u == "Hz") return x;
      if (u == "kHz") return x * 1e3;
      if (u == "MHz") return x * 1e6;
      if (u == "GHz") return x * 1e9;
      return bad();
    case Quantity::power:
      if (u.empty() || u == "W") return x;
      if (u == "mW") return x * 1e-3;
      if (u == "uW") return x * 1e-6;
      if (u == "dBm") return from_db(x - 30.0);
      if (u == "dBW") return from_db(x);
      return bad();
    case Quantity::bits:
      if (u.empty() || u == "bit" || u == "bits") return x;
      if (u == "kbit") return x * 1e3;
      if (u == "Mbit") return x * 1e6;
      if (u == "Gbit") return x * 1e9;
      return bad();
    case Quantity::distance:
      if (u.empty() || u == "m") return x;
      if (u == "km") return x * 1e3;
      return bad();
    case Quantity::gain:
      if (u.empty()) return x;
      if (u == "dB") return from_db(x);
      return bad();
    case Quantity::level_db:
      return u.empty() || u == "dB" ? x : bad();
    case Quantity::noise_density:  // result in dBm/Hz
      if (u == "dBm/Hz") return x;
      if (u == "dBW/Hz") return x + 30.0;
      if (u == "W/Hz") return x > 0.0 ? 10.0 * std::log10(x) + 30.0 : bad();
      return bad();
  }
  return bad();
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class Int>
Int parse_integer(const std::string& text, int line) {
  Int v{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ParseError("'" + text + "' is not an integer", line);
  return v;
}

inline bool parse_bool(const std::string& text, int line) {
  if (text == "true") return true;
  if (text == "false") return false;
  throw ParseError("'" + text + "' is not true or false", line);
}

inline std::string with_unit(double v, const char* unit) {
  std::string s = csv::number(v);
  if (*unit) s += std::string(" ") + unit;
  return s;
}

struct State {
  std::set<std::string> assigned;        // instance fields given so far
  std::optional<double> noise_dbm_hz;    // instance noise given as a density
  std::optional<double> noise_watts;     // instance noise given as a power
};

struct Field {
  std::string section;
  std::string key;
  std::function<void(Config&, State&, const std::string&, int)> set;
  std::function<std::optional<std::string>(const Config&)> render;  // empty: not written
};

using RealRef = std::function<double&(Config&)>;

inline Field real(std::string sec, std::string key, Quantity q, const char* unit, RealRef ref) {
  const std::string k = key;
  const bool track = sec == "instance";
  return {std::move(sec), std::move(key),
          [=](Config& c, State& st, const std::string& v, int line) {
            ref(c) = to_si(q, split_number(v, line), line);
            if (track) st.assigned.insert(k);
          },
          [=](const Config& c) -> std::optional<std::string> {
            return with_unit(ref(const_cast<Config&>(c)), unit);
          }};
}

inline Field instance_real(std::string key, Quantity q, const char* unit, double ProblemInstance::*m) {
  Field f = real("instance", std::move(key), q, unit, [m](Config& c) -> double& { return (*c.instance).*m; });
  f.render = [f0 = f.render](const Config& c) -> std::optional<std::string> {
    return c.instance ? f0(c) : std::nullopt;
  };
  return f;
}

/// Sets several instance fields at once; never rendered.
inline Field instance_alias(std::string key, Quantity q, std::vector<std::pair<std::string, double ProblemInstance::*>> to) {
  return {"instance", std::move(key),
          [=](Config& c, State& st, const std::string& v, int line) {
            const double x = to_si(q, split_number(v, line), line);
            for (const auto& [name, m] : to) {
              (*c.instance).*m = x;
              st.assigned.insert(name);
            }
          },
          [](const Config&) -> std::optional<std::string> { return std::nullopt; }};
}

template <class Int>
Field integer(std::string sec, std::string key, std::function<Int&(Config&)> ref) {
  return {std::move(sec), std::move(key),
          [=](Config& c, State&, const std::string& v, int line) { ref(c) = parse_integer<Int>(v, line); },
          [=](const Config& c) -> std::optional<std::string> { return std::to_string(ref(const_cast<Config&>(c))); }};
}

inline Field optional_real(std::string sec, std::string key, std::function<std::optional<double>&(Config&)> ref) {
  return {std::move(sec), std::move(key),
          [=](Config& c, State&, const std::string& v, int line) {
            ref(c) = to_si(Quantity::plain, split_number(v, line), line);
          },
          [=](const Config& c) -> std::optional<std::string> {
            const auto& o = ref(const_cast<Config&>(c));
            return o ? std::optional<std::string>(csv::number(*o)) : std::nullopt;
          }};
}

inline Field real_list(std::string sec, std::string key, Quantity q, const char* unit,
                       std::function<std::vector<double>&(Config&)> ref) {
  return {std::move(sec), std::move(key),
          [=](Config& c, State&, const std::string& v, int line) {
            std::vector<double> out;
            for (const auto& item : split_list(v)) out.push_back(to_si(q, split_number(item, line), line));
            if (out.empty()) throw ParseError("empty list", line);
            ref(c) = std::move(out);
          },
          [=](const Config& c) -> std::optional<std::string> {
            const auto& xs = ref(const_cast<Config&>(c));
            if (xs.empty()) return std::nullopt;
            std::string s;
            for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + with_unit(xs[i], unit);
            return s;
          }};
}

inline const std::vector<std::string>& required_instance_keys() {
  static const std::vector<std::string> keys = {
      "W",      "L",      "gamma",     "Kl",        "Kr",        "rho",       "eta_l",     "eta_r",
      "hA1_sq", "hB1_sq", "hA2_sq",    "hB2_sq",    "sig_R1_sq", "sig_B1_sq", "sig_R2_sq", "sig_B2_sq",
      "P_A_max", "P_R_max", "F_l_max", "F_r_max"};
  return keys;
}

inline const std::vector<Field>& fields() {
  using Q = Quantity;
  using PI = ProblemInstance;
  static const std::vector<Field> table = [] {
    std::vector<Field> t;
    // [instance]
    t.push_back(instance_real("W", Q::frequency, "Hz", &PI::W));
    t.push_back(instance_real("L", Q::bits, "bit", &PI::L));
    t.push_back(instance_real("gamma", Q::plain, "", &PI::gamma));
    t.push_back(instance_real("Kl", Q::plain, "", &PI::Kl));
    t.push_back(instance_real("Kr", Q::plain, "", &PI::Kr));
    t.push_back(instance_alias("K", Q::plain, {{"Kl", &PI::Kl}, {"Kr", &PI::Kr}}));
    t.push_back(instance_real("rho", Q::plain, "", &PI::rho));
    t.push_back(instance_real("eta_l", Q::plain, "", &PI::eta_l));
    t.push_back(instance_real("eta_r", Q::plain, "", &PI::eta_r));
    t.push_back(instance_alias("eta", Q::plain, {{"eta_l", &PI::eta_l}, {"eta_r", &PI::eta_r}}));
    t.push_back(instance_real("hA1_sq", Q::gain, "", &PI::hA1_sq));
    t.push_back(instance_real("hB1_sq", Q::gain, "", &PI::hB1_sq));
    t.push_back(instance_real("hA2_sq", Q::gain, "", &PI::hA2_sq));
    t.push_back(instance_real("hB2_sq", Q::gain, "", &PI::hB2_sq));
    t.push_back(instance_real("sig_R1_sq", Q::power, "W", &PI::sig_R1_sq));
    t.push_back(instance_real("sig_B1_sq", Q::power, "W", &PI::sig_B1_sq));
    t.push_back(instance_real("sig_R2_sq", Q::power, "W", &PI::sig_R2_sq));
    t.push_back(instance_real("sig_B2_sq", Q::power, "W", &PI::sig_B2_sq));
    t.push_back({"instance", "noise",
                 [](Config&, State& st, const std::string& v, int line) {
                   const Number n = split_number(v, line);
                   if (n.unit.find("/Hz") != std::string::npos) {
                     st.noise_dbm_hz = to_si(Q::noise_density, n, line);
                     st.noise_watts.reset();
                   } else {
                     st.noise_watts = to_si(Q::power, n, line);
                     st.noise_dbm_hz.reset();
                   }
                 },
                 [](const Config&) -> std::optional<std::string> { return std::nullopt; }});
    t.push_back(instance_real("P_A_max", Q::power, "W", &PI::P_A_max));
    t.push_back(instance_real("P_R_max", Q::power, "W", &PI::P_R_max));
    t.push_back(instance_real("F_l_max", Q::frequency, "Hz", &PI::F_l_max));
    t.push_back(instance_real("F_r_max", Q::frequency, "Hz", &PI::F_r_max));
    t.push_back({"instance", "relaying",
                 [](Config& c, State&, const std::string& v, int line) {
                   try {
                     c.instance->relaying = relaying_from_string(v);
                   } catch (const InvalidInstance& e) {
                     throw ParseError(e.what(), line);
                   }
                 },
                 [](const Config& c) -> std::optional<std::string> {
                   return c.instance ? std::optional<std::string>(to_string(c.instance->relaying)) : std::nullopt;
                 }});

    // [scenario]
    auto sc = [](auto m) { return [m](Config& c) -> double& { return c.experiment.scenario.*m; }; };
    using SD = ScenarioDefaults;
    t.push_back(real("scenario", "W", Q::frequency, "Hz", sc(&SD::W)));
    t.push_back(real("scenario", "K", Q::plain, "", sc(&SD::K)));
    t.push_back(real("scenario", "rho", Q::plain, "", sc(&SD::rho)));
    t.push_back(real("scenario", "eta", Q::plain, "", sc(&SD::eta)));
    t.push_back(real("scenario", "P_A_max", Q::power, "W", sc(&SD::P_A_max)));
    t.push_back(real("scenario", "P_R_max", Q::power, "W", sc(&SD::P_R_max)));
    t.push_back(real("scenario", "F_l_max", Q::frequency, "Hz", sc(&SD::F_l_max)));
    t.push_back(real("scenario", "F_r_max", Q::frequency, "Hz", sc(&SD::F_r_max)));
    t.push_back(real("scenario", "noise", Q::noise_density, "dBm/Hz", sc(&SD::noise_dbm_hz)));
    t.push_back(real("scenario", "L_min", Q::bits, "bit", sc(&SD::L_min)));
    t.push_back(real("scenario", "L_max", Q::bits, "bit", sc(&SD::L_max)));

    // [channel]
    auto ch = [](auto m) { return [m](Config& c) -> double& { return c.experiment.channel.*m; }; };
    using CC = ChannelConfig;
    t.push_back({"channel", "mode",
                 [](Config& c, State&, const std::string& v, int line) {
                   try {
                     c.experiment.channel.mode = channel_mode_from_string(v);
                   } catch (const InvalidInstance& e) {
                     throw ParseError(e.what(), line);
                   }
                 },
                 [](const Config& c) -> std::optional<std::string> { return to_string(c.experiment.channel.mode); }});
    t.push_back(real("channel", "sigma_h_sq", Q::gain, "", ch(&CC::sigma_h_sq)));
    t.push_back(real("channel", "pl0", Q::level_db, "dB", ch(&CC::pl0_db)));
    t.push_back(real("channel", "d0", Q::distance, "m", ch(&CC::d0)));
    t.push_back(real("channel", "chi", Q::plain, "", ch(&CC::chi)));
    t.push_back(real("channel", "dAB", Q::distance, "m", ch(&CC::dAB)));
    t.push_back(real("channel", "D", Q::distance, "m", ch(&CC::D)));

    // [experiment]
    t.push_back({"experiment", "experiment",
                 [](Config& c, State&, const std::string& v, int line) {
                   try {
                     c.experiment.experiment = experiment_from_string(v);
                   } catch (const InvalidInstance& e) {
                     throw ParseError(e.what(), line);
                   }
                 },
                 [](const Config& c) -> std::optional<std::string> { return to_string(c.experiment.experiment); }});
    t.push_back(real_list("experiment", "gammas", Q::plain, "",
                          [](Config& c) -> std::vector<double>& { return c.experiment.gammas; }));
    t.push_back(real_list("experiment", "Ls", Q::bits, "bit",
                          [](Config& c) -> std::vector<double>& { return c.experiment.Ls; }));
    t.push_back(real_list("experiment", "distances", Q::distance, "m",
                          [](Config& c) -> std::vector<double>& { return c.experiment.distances; }));
    t.push_back(integer<int>("experiment", "trials", [](Config& c) -> int& { return c.experiment.trials; }));
    t.push_back(integer<std::uint64_t>("experiment", "seed",
                                       [](Config& c) -> std::uint64_t& { return c.experiment.seed; }));
    t.push_back({"experiment", "solvers",
                 [](Config& c, State&, const std::string& v, int line) {
                   std::vector<std::string> out;
                   for (const auto& s : split_list(v)) {
                     const std::string name = canonical_solver_name(s);
                     if (name.empty()) throw ParseError("unknown solver '" + s + "'", line);
                     out.push_back(name);
                   }
                   c.experiment.solvers = std::move(out);
                 },
                 [](const Config& c) -> std::optional<std::string> {
                   const auto& s = c.experiment.solvers;
                   if (s.empty()) return std::nullopt;
                   std::string r;
                   for (std::size_t i = 0; i < s.size(); ++i) r += (i ? ", " : "") + s[i];
                   return r;
                 }});
    t.push_back({"experiment", "output",
                 [](Config& c, State&, const std::string& v, int) { c.experiment.output_dir = v; },
                 [](const Config& c) -> std::optional<std::string> { return c.experiment.output_dir; }});
    t.push_back(integer<int>("experiment", "threads", [](Config& c) -> int& { return c.experiment.threads; }));
    t.push_back({"experiment", "timing",
                 [](Config& c, State&, const std::string& v, int line) { c.experiment.timing = parse_bool(v, line); },
                 [](const Config& c) -> std::optional<std::string> {
                   return std::string(c.experiment.timing ? "true" : "false");
                 }});

    // [cccp]
    auto cc = [](auto m) { return [m](Config& c) -> auto& { return c.experiment.settings.cccp.*m; }; };
    using CP = CccpConfig;
    t.push_back(real("cccp", "delta", Q::plain, "", cc(&CP::delta)));
    t.push_back(real("cccp", "rel_delta", Q::plain, "", cc(&CP::rel_delta)));
    t.push_back(integer<int>("cccp", "n_max", cc(&CP::n_max)));
    t.push_back(real("cccp", "inner_tol", Q::plain, "", cc(&CP::inner_tol)));
    t.push_back(real("cccp", "barrier_t0", Q::plain, "", cc(&CP::barrier_t0)));
    t.push_back(real("cccp", "barrier_mu", Q::plain, "", cc(&CP::barrier_mu)));
    t.push_back(integer<int>("cccp", "max_newton", cc(&CP::max_newton)));
    t.push_back(real("cccp", "ts_cap_factor", Q::plain, "", cc(&CP::ts_cap_factor)));

    // [ibcd]
    auto ib = [](auto m) { return [m](Config& c) -> auto& { return c.experiment.settings.ibcd.*m; }; };
    using IB = IbcdConfig;
    t.push_back(real("ibcd", "beta", Q::plain, "", ib(&IB::beta)));
    t.push_back(real("ibcd", "zeta", Q::plain, "", ib(&IB::zeta)));
    t.push_back(real("ibcd", "rel_zeta", Q::plain, "", ib(&IB::rel_zeta)));
    t.push_back(integer<int>("ibcd", "n_max", ib(&IB::n_max)));
    t.push_back(real("ibcd", "armijo_sigma", Q::plain, "", ib(&IB::armijo_sigma)));
    t.push_back(real("ibcd", "armijo_ratio", Q::plain, "", ib(&IB::armijo_ratio)));
    t.push_back(integer<int>("ibcd", "armijo_max_halvings", ib(&IB::armijo_max_halvings)));
    t.push_back(real("ibcd", "bisect_tol", Q::plain, "", ib(&IB::bisect_tol)));
    t.push_back(real("ibcd", "lambda_tol", Q::plain, "", ib(&IB::lambda_tol)));
    t.push_back(integer<int>("ibcd", "lambda_max_doublings", ib(&IB::lambda_max_doublings)));
    t.push_back(real("ibcd", "eps_interior", Q::plain, "", ib(&IB::eps_interior)));
    t.push_back(real("ibcd", "pg_step", Q::plain, "", ib(&IB::pg_step)));
    t.push_back(integer<int>("ibcd", "nu_grid", ib(&IB::nu_grid)));
    t.push_back(optional_real("ibcd", "fixed_alpha", ib(&IB::fixed_alpha)));
    t.push_back(optional_real("ibcd", "fixed_nu", ib(&IB::fixed_nu)));

    // [af]
    auto af = [](auto m) { return [m](Config& c) -> auto& { return c.experiment.settings.af.*m; }; };
    t.push_back(integer<int>("af", "max_iterations", af(&AfConfig::max_iterations)));
    t.push_back(real("af", "rel_tol", Q::plain, "", af(&AfConfig::rel_tol)));
    return t;
  }();
  return table;
}

inline const std::vector<std::string>& sections() {
  static const std::vector<std::string> s = {"instance", "scenario", "channel", "experiment", "cccp", "ibcd", "af"};
  return s;
}

} // namespace config_detail

/// Parses configuration text on top of `base`.
inline Config parse_config(std::string_view text, const Config& base = {}) {
  using namespace config_detail;
  Config c = base;
  State st;
  std::string section;
  std::set<std::string> seen;
  std::istringstream is{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(std::string_view(raw).substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ParseError("unterminated section header", line);
      section = trim(std::string_view(s).substr(1, s.size() - 2));
      const auto& all = sections();
      if (std::find(all.begin(), all.end(), section) == all.end())
        throw ParseError("unknown section [" + section + "]", line);
      if (section == "instance" && !c.instance) c.instance = ProblemInstance{};
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (section.empty()) throw ParseError("key '" + key + "' appears before any section", line);
    if (key.empty()) throw ParseError("missing key", line);
    if (value.empty()) throw ParseError("missing value for '" + key + "'", line);
    if (!seen.insert(section + "." + key).second) throw ParseError("duplicate key '" + key + "'", line);
    const auto& table = fields();
    const auto f = std::find_if(table.begin(), table.end(),
                                [&](const Field& x) { return x.section == section && x.key == key; });
    if (f == table.end()) throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
    f->set(c, st, value, line);
  }

  if (c.instance && seen.count("instance.noise")) {
    ProblemInstance& in = *c.instance;
    const double n = st.noise_watts ? *st.noise_watts
                                    : (st.assigned.count("W") ? noise_power(*st.noise_dbm_hz, in.W) : 0.0);
    for (auto [name, m] : {std::pair{"sig_R1_sq", &ProblemInstance::sig_R1_sq},
                           std::pair{"sig_B1_sq", &ProblemInstance::sig_B1_sq},
                           std::pair{"sig_R2_sq", &ProblemInstance::sig_R2_sq},
                           std::pair{"sig_B2_sq", &ProblemInstance::sig_B2_sq}}) {
      if (st.assigned.count(name)) continue;
      in.*m = n;
      if (n > 0.0) st.assigned.insert(name);
    }
  }
  if (c.instance && !(base.instance))
    for (const auto& k : required_instance_keys())
      if (!st.assigned.count(k)) throw ParseError("missing required key '" + k + "' in [instance]", 0);
  return c;
}

inline Config load_config(const std::string& path, const Config& base = {}) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot open config file '" + path + "'", 0);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), base);
}

/// Every setting, one key per line, in SI units.
inline std::string render(const Config& c) {
  using namespace config_detail;
  std::ostringstream os;
  bool first = true;
  for (const auto& sec : sections()) {
    if (sec == "instance" && !c.instance) continue;
    if (!first) os << '\n';
    first = false;
    os << '[' << sec << "]\n";
    for (const auto& f : fields())
      if (f.section == sec)
        if (auto v = f.render(c)) os << f.key << " = " << *v << '\n';
  }
  return os.str();
}

} // namespace raco

#endif // RACO_CONFIG_HPP
