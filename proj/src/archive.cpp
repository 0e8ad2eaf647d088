#include "fspec/io/archive.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fspec/errors.hpp"

namespace fspec::io {

using nlohmann::ordered_json;

std::string archive_json(const RunConfig& cfg, const SpectrumTable<double>& table) {
  ordered_json j;
  j["format"] = "fspec-spectrum/1";
  j["digest"] = digest(cfg);
  const auto w = cfg.weight();
  j["weight"] = {{"kappa", cfg.kappa}, {"a", w.a}, {"b", w.b}, {"a_exact", to_string(cfg.a)}};
  j["boundary"] = {{"alpha", cfg.alpha}, {"beta", cfg.beta}};
  ordered_json solver = {{"grid_generation", cfg.grid_generation},
                         {"substeps", cfg.substeps},
                         {"scan_ratio", cfg.scan_ratio},
                         {"tol", cfg.tol},
                         {"lambda_min", cfg.lambda_min},
                         {"renorm_every", cfg.renorm_every}};
  if (cfg.n_max) solver["n_max"] = *cfg.n_max;
  if (cfg.lambda_max) solver["lambda_max"] = *cfg.lambda_max;
  solver["certified_up_to"] = table.certified_up_to;
  solver["rescans"] = table.meta.rescans;
  solver["det_evaluations"] = table.meta.det_evaluations;
  j["solver"] = solver;
  ordered_json eigen = ordered_json::array();
  for (const auto& p : table.pairs)
    eigen.push_back({{"n", p.index},
                     {"lambda", p.lambda},
                     {"zeros", p.zero_count},
                     {"det_residual", p.det_residual},
                     {"rayleigh_gap", p.rayleigh_gap}});
  j["eigenvalues"] = eigen;
  return j.dump(2) + "\n";
}

SpectrumArchive parse_archive(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("archive: malformed JSON: ") + e.what());
  }
  try {
    SpectrumArchive ar;
    RunConfig& c = ar.config;
    c.kappa = j.at("weight").at("kappa").get<int>();
    c.a = parse_scale(j.at("weight").at("a_exact").get<std::string>());
    c.alpha = j.at("boundary").at("alpha").get<double>();
    c.beta = j.at("boundary").at("beta").get<double>();
    const auto& s = j.at("solver");
    c.grid_generation = s.at("grid_generation").get<int>();
    c.substeps = s.at("substeps").get<int>();
    c.scan_ratio = s.at("scan_ratio").get<double>();
    c.tol = s.at("tol").get<double>();
    c.lambda_min = s.at("lambda_min").get<double>();
    c.renorm_every = s.at("renorm_every").get<int>();
    if (s.contains("n_max")) c.n_max = s.at("n_max").get<int>();
    if (s.contains("lambda_max")) c.lambda_max = s.at("lambda_max").get<double>();
    c.validate();
    ar.digest = j.at("digest").get<std::string>();

    SpectrumTable<double>& t = ar.table;
    t.config = c.boundary();
    t.weight = c.weight();
    t.certified_up_to = s.at("certified_up_to").get<double>();
    t.meta = {c.grid_generation, c.substeps, c.scan_ratio, c.lambda_min, c.tol,
              static_cast<std::size_t>(c.renorm_every), s.at("rescans").get<int>(),
              s.at("det_evaluations").get<std::size_t>()};
    for (const auto& e : j.at("eigenvalues")) {
      Eigenpair<double> p;
      p.index = e.at("n").get<int>();
      p.lambda = e.at("lambda").get<double>();
      p.zero_count = e.at("zeros").get<int>();
      p.det_residual = e.at("det_residual").get<double>();
      p.rayleigh_gap = e.at("rayleigh_gap").get<double>();
      t.pairs.push_back(std::move(p));
    }
    return ar;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("archive: missing or mistyped field: ") + e.what());
  }
}

void write_archive(const std::string& path, const RunConfig& cfg, const SpectrumTable<double>& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot open '" + path + "' for writing");
  out << archive_json(cfg, table);
  if (!out) throw DomainError("write to '" + path + "' failed");
}

SpectrumArchive read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open archive '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_archive(ss.str());
}

SpectrumTable<double> recertify(const SpectrumArchive& archive) {
  if (digest(archive.config) != archive.digest)
    throw ConfigMismatch("archive: digest " + archive.digest + " does not match the stored configuration");
  SpectrumSolver<double> solver(archive.config.boundary(), archive.config.weight(), archive.config.solver());
  SpectrumTable<double> out = archive.table;
  for (std::size_t i = 0; i < out.pairs.size(); ++i) {
    const auto& stored = archive.table.pairs[i];
    if (stored.index != static_cast<int>(i))
      throw CertificationError("archive: eigenvalue indices are not contiguous at position " + std::to_string(i));
    auto pair = solver.eigenpair_at(stored.lambda, stored.index);
    if (pair.zero_count != stored.zero_count)
      throw CertificationError("archive: eigenpair " + std::to_string(i) + " now has " +
                               std::to_string(pair.zero_count) + " sign changes, archive says " +
                               std::to_string(stored.zero_count));
    solver.certify(pair);
    // The stored value must still bracket exactly one eigenvalue at the stored tolerance.
    const double lo = stored.lambda == 0.0 ? 0.0 : stored.lambda * (1 - 4 * archive.config.tol);
    const double hi = stored.lambda == 0.0 ? archive.config.lambda_min : stored.lambda * (1 + 4 * archive.config.tol);
    if ((stored.lambda != 0.0 && solver.eigenvalue_count(lo) != stored.index) ||
        solver.eigenvalue_count(hi) != stored.index + 1)
      throw CertificationError("archive: stored eigenvalue " + std::to_string(i) + " = " +
                               format_number(stored.lambda) + " is not an eigenvalue of the stored problem");
    out.pairs[i] = std::move(pair);
  }
  return out;
}

}  // namespace fspec::io
