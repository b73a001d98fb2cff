#pragma once

#include <optional>
#include <string>

#include "sbmor/control.hpp"
#include "sbmor/reduction.hpp"
#include "sbmor/system.hpp"

namespace sbmor {

/// One JSON file naming the dimensions and per-matrix Matrix Market
/// files; matrix paths are resolved relative to the manifest directory.
BilinearStochasticSystem load_system_manifest(const std::string& manifest_path);

/// Writes <name>.json plus one .mtx file per matrix into dir; returns the
/// manifest path.
std::string save_system_manifest(const BilinearStochasticSystem& sys,
                                 const std::string& dir,
                                 const std::string& name);

/// Reduced-model manifest: same layout with added D / E / F entries and an
/// `order` field.
std::string save_rom_manifest(const ReducedModel& rom, const std::string& dir,
                              const std::string& name);
ReducedModel load_rom_manifest(const std::string& manifest_path);

/// Control declared inline in a manifest, if present.
std::optional<ControlSignal>
load_manifest_control(const std::string& manifest_path, double horizon);

/// CSV with columns t, u1..um; values are held constant between samples.
ControlSignal load_control_csv(const std::string& csv_path, double horizon);

/// Command-line shorthand: "zero", "constant:a1,a2,...",
/// "sinusoid:freq;a1,a2,...", "table:file.csv".
ControlSignal parse_control_spec(const std::string& spec, Eigen::Index m,
                                 double horizon);

} // namespace sbmor
