#include "survmax/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <type_traits>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "survmax/errors.hpp"

namespace survmax {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_params(const std::string& text, const std::string& source, long line) {
  std::string s = text;
  for (char& c : s) {
    if (c == ',') c = ' ';
  }
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(fmt::format("{}: line {}: '{}' is not a number", source, line, tok), line);
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

Distribution make_distribution(const std::string& family, const std::vector<double>& params) {
  auto need = [&](std::size_t k) {
    if (params.size() != k) {
      throw DomainError(fmt::format("family '{}' takes {} parameter(s), got {}", family, k, params.size()));
    }
  };
  if (family == "uniform") {
    need(2);
    return Distribution::uniform(params[0], params[1]);
  }
  if (family == "exponential") {
    need(1);
    return Distribution::exponential(params[0]);
  }
  if (family == "truncated_exponential") {
    need(2);
    return Distribution::truncated_exponential(params[0], params[1]);
  }
  if (family == "endpoint_power") {
    need(2);
    return Distribution::endpoint_power(params[0], params[1]);
  }
  throw DomainError(fmt::format("unknown distribution family '{}'", family));
}

CureModel parse_model(std::istream& in, const std::string& source) {
  std::map<std::string, std::pair<std::string, long>> kv;
  std::string raw;
  long line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(fmt::format("{}: line {}: expected key = value", source, line), line);
    const std::string key = trim(s.substr(0, eq));
    if (kv.count(key) != 0) throw ParseError(fmt::format("{}: line {}: duplicate key '{}'", source, line, key), line);
    kv[key] = {trim(s.substr(eq + 1)), line};
  }
  for (const auto& [key, value] : kv) {
    if (key != "family.F" && key != "params.F" && key != "family.G" && key != "params.G" && key != "p") {
      throw ParseError(fmt::format("{}: line {}: unknown key '{}'", source, value.second, key), value.second);
    }
  }
  auto get = [&](const std::string& key) -> const std::pair<std::string, long>& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(fmt::format("{}: missing key '{}'", source, key), line);
    return it->second;
  };
  auto dist = [&](const char* which) {
    const auto& fam = get(fmt::format("family.{}", which));
    const auto& par = get(fmt::format("params.{}", which));
    try {
      return make_distribution(fam.first, parse_params(par.first, source, par.second));
    } catch (const DomainError& e) {
      throw ParseError(fmt::format("{}: line {}: {}", source, fam.second, e.what()), fam.second);
    }
  };
  const Distribution F = dist("F");
  const Distribution G = dist("G");
  const auto& p_entry = get("p");
  const std::vector<double> p = parse_params(p_entry.first, source, p_entry.second);
  if (p.size() != 1) throw ParseError(fmt::format("{}: line {}: p takes one value", source, p_entry.second), p_entry.second);
  return CureModel(F, G, p[0]);
}

CureModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open model file '{}'", path), 0);
  return parse_model(in, path);
}

std::string format_model(const CureModel& model) {
  auto params = [](const Distribution& d) {
    return std::visit(
        [](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, Uniform>) return fmt::format("{:.17g}, {:.17g}", f.lo, f.hi);
          if constexpr (std::is_same_v<T, Exponential>) return fmt::format("{:.17g}", f.rate);
          if constexpr (std::is_same_v<T, TruncatedExponential>) return fmt::format("{:.17g}, {:.17g}", f.rate, f.tau);
          if constexpr (std::is_same_v<T, EndpointPower>) return fmt::format("{:.17g}, {:.17g}", f.tau, f.beta);
        },
        d.family());
  };
  return fmt::format("family.F = {}\nparams.F = {}\nfamily.G = {}\nparams.G = {}\np = {:.17g}\n", model.lifetime().name(),
                     params(model.lifetime()), model.censoring().name(), params(model.censoring()), model.p());
}

}  // namespace survmax
