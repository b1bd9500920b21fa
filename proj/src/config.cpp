#include "qhmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qhmc {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_number_list(const std::string& value) {
  std::vector<double> out;
  std::string token;
  std::istringstream stream(value);
  while (std::getline(stream, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    out.push_back(std::stod(token));
  }
  return out;
}

bool parse_bool(const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("expected a boolean, got '" + value + "'");
}

using Section = std::map<std::string, std::string>;

std::map<std::string, Section> parse_sections(const std::string& text) {
  std::map<std::string, Section> sections;
  std::string current = "experiment";
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty key");
    sections[current][key] = value;
  }
  return sections;
}

void apply_experiment_section(const Section& sec, ExperimentConfig& cfg) {
  for (const auto& [key, value] : sec) {
    if (key == "kind") cfg.kind = value;
    else if (key == "target") cfg.target = value;
    else if (key == "q_values") cfg.q_values = parse_number_list(value);
    else if (key == "dt") cfg.dt = std::stod(value);
    else if (key == "steps") cfg.steps = std::stoi(value);
    else if (key == "n_samples") cfg.n_samples = std::stoi(value);
    else if (key == "burn_in") cfg.burn_in = std::stoi(value);
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "x0") cfg.x0 = parse_number_list(value);
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "analyzed_coordinate") cfg.analyzed_coordinate = std::stoul(value);
    else if (key == "track_jacobian") cfg.track_jacobian = parse_bool(value);
    else if (key == "jobs") cfg.jobs = std::stoi(value);
    else if (key == "force_x") cfg.force_x = std::stod(value);
    else throw std::invalid_argument("unknown key '" + key + "' in [experiment]");
  }
}

void apply_adapt_section(const Section& sec, ExperimentConfig& cfg) {
  AdaptConfig adapt;
  for (const auto& [key, value] : sec) {
    if (key == "target_accept") adapt.target_accept = std::stod(value);
    else if (key == "adapt_steps") adapt.adapt_steps = std::stoi(value);
    else if (key == "learning_rate") adapt.learning_rate = std::stod(value);
    else throw std::invalid_argument("unknown key '" + key + "' in [adapt]");
  }
  cfg.adapt = adapt;
}

void apply_gravity_section(const Section& sec, ExperimentConfig& cfg) {
  for (const auto& [key, value] : sec) {
    if (key == "true_depth") cfg.gravity.true_depth = std::stod(value);
    else if (key == "x_f") cfg.gravity.x_f = std::stod(value);
    else if (key == "sensors") cfg.gravity.sensors = parse_number_list(value);
    else if (key == "sigma") cfg.gravity.sigma = std::stod(value);
    else if (key == "prior_mean") cfg.gravity.prior_mean = std::stod(value);
    else if (key == "prior_std") cfg.gravity.prior_std = std::stod(value);
    else if (key == "data_seed") cfg.gravity.data_seed = std::stoull(value);
    else throw std::invalid_argument("unknown key '" + key + "' in [gravity]");
  }
}

void apply_diffusion_section(const Section& sec, ExperimentConfig& cfg) {
  for (const auto& [key, value] : sec) {
    if (key == "grid_n") cfg.diffusion.grid_n = std::stoul(value);
    else if (key == "n_modes") cfg.diffusion.n_modes = std::stoul(value);
    else if (key == "smoothness") cfg.diffusion.smoothness = std::stod(value);
    else if (key == "n_obs") cfg.diffusion.n_obs = std::stoul(value);
    else if (key == "sigma") cfg.diffusion.sigma = std::stod(value);
    else if (key == "data_seed") cfg.diffusion.data_seed = std::stoull(value);
    else throw std::invalid_argument("unknown key '" + key + "' in [diffusion]");
  }
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  const auto sections = parse_sections(text);
  for (const auto& [name, sec] : sections) {
    if (name == "experiment") apply_experiment_section(sec, cfg);
    else if (name == "adapt") apply_adapt_section(sec, cfg);
    else if (name == "gravity") apply_gravity_section(sec, cfg);
    else if (name == "diffusion") apply_diffusion_section(sec, cfg);
    else throw std::invalid_argument("unknown config section [" + name + "]");
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  // Metadata documents are JSON objects; anything else is the key=value form.
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    const nlohmann::json doc = nlohmann::json::parse(text);
    return config_from_json(doc.contains("config") ? doc.at("config") : doc);
  }
  return parse_config_text(text);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j{{"kind", cfg.kind},
                   {"target", cfg.target},
                   {"q_values", cfg.q_values},
                   {"dt", cfg.dt},
                   {"steps", cfg.steps},
                   {"n_samples", cfg.n_samples},
                   {"burn_in", cfg.burn_in},
                   {"seed", cfg.seed},
                   {"x0", cfg.x0},
                   {"output_dir", cfg.output_dir},
                   {"analyzed_coordinate", cfg.analyzed_coordinate},
                   {"track_jacobian", cfg.track_jacobian},
                   {"jobs", cfg.jobs},
                   {"force_x", cfg.force_x}};
  if (cfg.adapt)
    j["adapt"] = {{"target_accept", cfg.adapt->target_accept},
                  {"adapt_steps", cfg.adapt->adapt_steps},
                  {"learning_rate", cfg.adapt->learning_rate}};
  j["gravity"] = {{"true_depth", cfg.gravity.true_depth},
                  {"x_f", cfg.gravity.x_f},
                  {"sensors", cfg.gravity.sensors},
                  {"sigma", cfg.gravity.sigma},
                  {"prior_mean", cfg.gravity.prior_mean},
                  {"prior_std", cfg.gravity.prior_std},
                  {"data_seed", cfg.gravity.data_seed}};
  j["diffusion"] = {{"grid_n", cfg.diffusion.grid_n},
                    {"n_modes", cfg.diffusion.n_modes},
                    {"smoothness", cfg.diffusion.smoothness},
                    {"n_obs", cfg.diffusion.n_obs},
                    {"sigma", cfg.diffusion.sigma},
                    {"data_seed", cfg.diffusion.data_seed}};
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  cfg.kind = j.value("kind", cfg.kind);
  cfg.target = j.value("target", cfg.target);
  cfg.q_values = j.value("q_values", cfg.q_values);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.n_samples = j.value("n_samples", cfg.n_samples);
  cfg.burn_in = j.value("burn_in", cfg.burn_in);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.x0 = j.value("x0", cfg.x0);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.analyzed_coordinate = j.value("analyzed_coordinate", cfg.analyzed_coordinate);
  cfg.track_jacobian = j.value("track_jacobian", cfg.track_jacobian);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.force_x = j.value("force_x", cfg.force_x);
  if (j.contains("adapt") && !j.at("adapt").is_null()) {
    const auto& a = j.at("adapt");
    AdaptConfig adapt;
    adapt.target_accept = a.value("target_accept", adapt.target_accept);
    adapt.adapt_steps = a.value("adapt_steps", adapt.adapt_steps);
    adapt.learning_rate = a.value("learning_rate", adapt.learning_rate);
    cfg.adapt = adapt;
  }
  if (j.contains("gravity")) {
    const auto& g = j.at("gravity");
    cfg.gravity.true_depth = g.value("true_depth", cfg.gravity.true_depth);
    cfg.gravity.x_f = g.value("x_f", cfg.gravity.x_f);
    cfg.gravity.sensors = g.value("sensors", cfg.gravity.sensors);
    cfg.gravity.sigma = g.value("sigma", cfg.gravity.sigma);
    cfg.gravity.prior_mean = g.value("prior_mean", cfg.gravity.prior_mean);
    cfg.gravity.prior_std = g.value("prior_std", cfg.gravity.prior_std);
    cfg.gravity.data_seed = g.value("data_seed", cfg.gravity.data_seed);
  }
  if (j.contains("diffusion")) {
    const auto& d = j.at("diffusion");
    cfg.diffusion.grid_n = d.value("grid_n", cfg.diffusion.grid_n);
    cfg.diffusion.n_modes = d.value("n_modes", cfg.diffusion.n_modes);
    cfg.diffusion.smoothness = d.value("smoothness", cfg.diffusion.smoothness);
    cfg.diffusion.n_obs = d.value("n_obs", cfg.diffusion.n_obs);
    cfg.diffusion.sigma = d.value("sigma", cfg.diffusion.sigma);
    cfg.diffusion.data_seed = d.value("data_seed", cfg.diffusion.data_seed);
  }
  return cfg;
}

std::vector<double> default_q_grid(std::size_t target_dim) {
  const double upper = target_dim >= 2 ? 1.1 : 1.2;
  std::vector<double> grid;
  grid.reserve(21);
  for (int i = 0; i < 20; ++i) grid.push_back(upper * static_cast<double>(i) / 19.0);
  grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace qhmc
