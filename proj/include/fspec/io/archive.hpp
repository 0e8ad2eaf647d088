#pragma once

#include <string>

#include "fspec/io/run_config.hpp"
#include "fspec/shooting.hpp"

namespace fspec::io {

/// A solved spectrum as persisted on disk. Eigenfunctions are not stored;
/// `table.pairs` carry index, eigenvalue and diagnostics only.
struct SpectrumArchive {
  RunConfig config;
  std::string digest;
  SpectrumTable<double> table;
};

std::string archive_json(const RunConfig& cfg, const SpectrumTable<double>& table);
SpectrumArchive parse_archive(const std::string& text);

void write_archive(const std::string& path, const RunConfig& cfg, const SpectrumTable<double>& table);
SpectrumArchive read_archive(const std::string& path);

/// Rebuilds every stored eigenpair at its stored eigenvalue with the stored
/// solver settings and certifies it again. Returns the rebuilt table.
/// Throws ConfigMismatch if the digest does not match the stored config, and
/// CertificationError if any eigenpair fails.
SpectrumTable<double> recertify(const SpectrumArchive& archive);

}  // namespace fspec::io
