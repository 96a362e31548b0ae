#include "state_arg.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>

namespace cli {

using optoretro::Complex;
using optoretro::GaussianState;
using optoretro::ValidationError;

namespace {

double parse_real(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != text.size() || text.empty()) throw ValidationError("state", fmt::format("bad number '{}' for {}", text, what));
  return v;
}

std::map<std::string, std::string> parse_args(const std::string& text) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ValidationError("state", fmt::format("expected key=value, got '{}'", item));
    out[item.substr(0, eq)] = item.substr(eq + 1);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

GaussianState pad_thermal(GaussianState head, const optoretro::ValidatedConfig& config) {
  const std::size_t n = config.size();
  if (head.modes() > n) {
    throw ValidationError("state", fmt::format("state has {} modes but the config has {} oscillators", head.modes(), n));
  }
  if (head.modes() == n) return head;
  std::vector<double> nu;
  for (std::size_t i = head.modes(); i < n; ++i) nu.push_back(config.modes()[i].nu);
  return optoretro::direct_sum(head, optoretro::thermal_state(nu));
}

}  // namespace

Complex parse_complex(const std::string& text) {
  if (text.empty()) throw ValidationError("state", "empty complex number");
  if (text.back() != 'i') return {parse_real(text, "real part"), 0.0};
  const std::string body = text.substr(0, text.size() - 1);
  // Split at the last sign that is not part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  const auto imag_of = [](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s, "imaginary part");
  };
  if (split == std::string::npos) return {0.0, imag_of(body)};
  return {parse_real(body.substr(0, split), "real part"), imag_of(body.substr(split))};
}

GaussianState parse_state(const std::string& text, const optoretro::ValidatedConfig& config) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);

  if (kind == "file") {
    std::ifstream in(rest);
    if (!in) throw optoretro::IoError(fmt::format("cannot open state file '{}'", rest));
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("state", fmt::format("'{}' is not valid JSON: {}", rest, e.what()));
    }
    return pad_thermal(optoretro::state_from_json(doc), config);
  }

  const auto args = rest.empty() ? std::map<std::string, std::string>{} : parse_args(rest);
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = args.find(key);
    return it == args.end() ? nullptr : &it->second;
  };
  const auto reject_unknown = [&](std::initializer_list<const char*> known) {
    for (const auto& [k, v] : args) {
      bool ok = false;
      for (const char* name : known) ok = ok || k == name;
      if (!ok) throw ValidationError("state", fmt::format("unknown parameter '{}' for '{}'", k, kind));
    }
  };

  if (kind == "vacuum") {
    reject_unknown({});
    return optoretro::thermal_state(std::vector<double>(config.size(), 0.0));
  }
  if (kind == "thermal") {
    reject_unknown({"nu"});
    std::vector<double> nu;
    for (const auto& m : config.modes()) nu.push_back(get("nu") ? parse_real(*get("nu"), "nu") : m.nu);
    return optoretro::thermal_state(nu);
  }
  if (kind == "squeezed") {
    reject_unknown({"db", "r", "theta", "alpha"});
    if (get("db") && get("r")) throw ValidationError("state", "give either db or r, not both");
    double r = 0.0;
    if (get("db")) r = optoretro::squeeze_parameter_from_db(parse_real(*get("db"), "db"));
    else if (get("r")) r = parse_real(*get("r"), "r");
    else throw ValidationError("state", "squeezed state needs db or r");
    const double theta = get("theta") ? parse_real(*get("theta"), "theta") : 0.0;
    const Complex alpha = get("alpha") ? parse_complex(*get("alpha")) : Complex{};
    return pad_thermal(optoretro::single_mode_squeezed(std::polar(r, theta), alpha), config);
  }
  if (kind == "tmss") {
    reject_unknown({"z"});
    if (!get("z")) throw ValidationError("state", "tmss needs z");
    if (config.size() < 2) throw ValidationError("state", "tmss needs at least two oscillators");
    return pad_thermal(optoretro::two_mode_squeezed(parse_complex(*get("z"))), config);
  }
  throw ValidationError("state", fmt::format("unknown state kind '{}'", kind));
}

}  // namespace cli
