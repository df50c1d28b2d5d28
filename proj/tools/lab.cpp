// lab: batch driver for the sigmalab experiments.
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "sigmalab/descriptors.hpp"
#include "sigmalab/error.hpp"
#include "sigmalab/experiments.hpp"

namespace {

using namespace sigmalab;

constexpr int kPass = 0;
constexpr int kConfigError = 1;
constexpr int kInvariantFailure = 2;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::MeshFormat:
      return kConfigError;
    default:
      return kInvariantFailure;
  }
}

Json load_config(const std::string& what) {
  if (std::filesystem::is_regular_file(what)) return read_json_file(what);
  if (auto canned = canned_config(what)) return *canned;
  throw Error(ErrorCode::ConfigError, "'" + what + "' is neither a config file nor a canned experiment");
}

int cmd_run(const std::string& target, const std::string& output) {
  // Everything that can fail on the input is checked before any file is written.
  const ExperimentConfig config = ExperimentConfig::from_json(load_config(target));
  const int threads = lab_threads();
  std::cerr << "lab: running " << config.name << " (" << to_string(config.kind) << ", " << threads
            << " thread" << (threads == 1 ? "" : "s") << ")\n";
  const RunOutcome out = run_and_persist(config, output, threads, std::cout);
  std::cout << (out.exit_code == kPass ? "PASSED " : "FAILED ") << config.name << " -> " << out.report_path << '\n';
  return out.exit_code;
}

int cmd_list() {
  for (const auto& c : canned_catalog()) std::cout << c.name << "\t" << c.description << '\n';
  return kPass;
}

int cmd_show(const std::string& name) {
  auto c = canned_config(name);
  if (!c) throw Error(ErrorCode::ConfigError, "unknown canned experiment '" + name + "'");
  std::cout << c->dump(2) << '\n';
  return kPass;
}

int cmd_mesh(const std::string& domain_path, double h, const std::string& output) {
  Json j = read_json_file(domain_path);
  if (j.contains("domain")) j = j.at("domain");
  const DomainSpec domain = domain_from_json(j);
  const Mesh mesh = triangulate(domain, h);
  const MeshCheck check = validate_mesh(mesh, &domain.boundary);
  std::ostringstream text;
  write_mesh(text, mesh);
  write_atomic(output, text.str());
  std::cout << "nodes " << mesh.num_nodes() << " triangles " << mesh.num_triangles() << " h " << mesh.h
            << " min_angle " << check.min_angle_deg << '\n';
  if (!check.ok()) {
    std::cerr << "lab: mesh invariant failure: " << check.message << '\n';
    return kInvariantFailure;
  }
  return kPass;
}

int cmd_character(const std::string& curve_path, int directions, const std::string& output) {
  Json j = read_json_file(curve_path);
  if (j.contains("domain")) j = j.at("domain");
  const DomainSpec domain = domain_from_json(j);
  const Json report = character_report(domain, directions);
  const std::string text = report.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    write_atomic(output, text);
  }
  return report["certified"].get<bool>() ? kPass : kInvariantFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sigma-harmonic mapping laboratory"};
  app.require_subcommand(1);

  std::string target, output;
  auto* run = app.add_subcommand("run", "run a config file or a canned experiment by name");
  run->add_option("config", target, "config.json or canned name")->required();
  run->add_option("-o,--output", output, "output directory (overrides the config)");

  app.add_subcommand("list", "list the canned experiments");

  std::string show_name;
  auto* show = app.add_subcommand("show", "print a canned experiment's config");
  show->add_option("name", show_name)->required();

  std::string domain_path, mesh_out;
  double h = 0.0;
  auto* mesh = app.add_subcommand("mesh", "triangulate a domain descriptor");
  mesh->set_help_flag("--help", "print this help message and exit");
  mesh->add_option("domain", domain_path, "domain.json")->required();
  mesh->add_option("--h", h, "target element size")->required();
  mesh->add_option("-o,--output", mesh_out, "mesh file")->required();

  std::string curve_path, char_out;
  int directions = 64;
  auto* character = app.add_subcommand("character", "certify the convexity character of a closed curve");
  character->add_option("curve", curve_path, "curve.json")->required();
  character->add_option("--directions", directions, "number of projection directions");
  character->add_option("-o,--output", char_out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kPass : kConfigError;
  }

  try {
    if (*run) return cmd_run(target, output);
    if (app.got_subcommand("list")) return cmd_list();
    if (*show) return cmd_show(show_name);
    if (*mesh) return cmd_mesh(domain_path, h, mesh_out);
    if (*character) return cmd_character(curve_path, directions, char_out);
  } catch (const Error& e) {
    std::cerr << "lab: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "lab: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
