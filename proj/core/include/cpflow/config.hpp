#pragma once

// Run configuration: JSON ingestion with key-path diagnostics, validation,
// canonical serialization and a content hash for provenance lines.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpflow/error.hpp"
#include "cpflow/flux_carrier.hpp"
#include "cpflow/geometry.hpp"
#include "cpflow/invading.hpp"
#include "cpflow/ns_solver.hpp"

namespace cpflow {

struct CarrierConfig {
  CarrierMode mode{CarrierMode::Hopf};
  double epsilon{0.5};
  bool calibrate{false};
  int samples{0};  // Leray-Hopf test fields; 0 disables sampling
  std::optional<std::uint64_t> seed;
  double window_a{2.0};
  double window_b{10.0};
  double target{0.125};
  double margin{2.0};
  friend bool operator==(const CarrierConfig&, const CarrierConfig&) = default;
};

struct DiagnosticsConfig {
  bool energy{true};
  bool asymptotics{false};
  bool uniqueness{false};
  double energy_tolerance{1e-6};
  double final_threshold{0.01};
  double uniqueness_tolerance{1e-8};
  double small_data_threshold{0.25};  // max data amplitude for the uniqueness run
  double init_norm{0.1};
  std::vector<double> sweep;          // amplitudes; empty skips the sweep
  friend bool operator==(const DiagnosticsConfig&, const DiagnosticsConfig&) = default;
};

struct RunSpec {
  std::string name;
  DomainSpec domain;
  double delta{1.0 / 16.0};
  CarrierConfig carrier;
  SolverOptions solver;
  Schedule schedule;
  double truncation{6.0};  // length used by carrier / solve / diagnose
  DiagnosticsConfig diagnostics;
  std::string output{"out"};
  friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

struct ConfigIssue {
  std::string key;  // dotted path, e.g. "domain.outlets[1].width"
  std::string reason;
  int line{0};      // 0 when unknown
};

/// ParseError or ValidationError carrying every issue found.
class ConfigError : public Error {
 public:
  ConfigError(ErrorCode code, std::vector<ConfigIssue> issues, double value = std::numeric_limits<double>::quiet_NaN());
  const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses JSON text; `origin` names the source in messages. With `check`
/// false only syntax and types are verified.
RunSpec parse_config_text(const std::string& text, const std::string& origin = "<config>", bool check = true);
/// Reads and parses a file. Throws ConfigError.
RunSpec parse_config(const std::string& path, bool check = true);

/// Every issue with a parsed spec (empty when valid).
std::vector<ConfigIssue> validation_issues(const RunSpec& spec);
/// Throws ConfigError(ValidationError) unless the spec is valid. A
/// compatibility failure carries the residual as value().
void validate(const RunSpec& spec);

/// Canonical JSON (sorted keys, two-space indent).
std::string serialize(const RunSpec& spec);
/// FNV-1a 64 of the compact canonical form without the output directory,
/// 16 hex digits.
std::string config_hash(const RunSpec& spec);

/// Largest boundary datum amplitude: fluxes, slips, obstacle and wall speeds.
double data_amplitude(const DomainSpec& spec);

std::string version();

}  // namespace cpflow
