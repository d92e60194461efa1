#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "fractrace/measure.hpp"
#include "fractrace/trace.hpp"

namespace fractrace {

// %.17g: round-trips every double.
std::string FormatNumber(double v);

// Measure CSV, one atom per line:
//   x[,y],weight,address,anchor_x[,anchor_y]
// The address is the dotted one-based word ("1.2.2"), "-" when absent.
void WriteMeasureCsv(std::ostream& out, const DiscreteMeasure& mu, int dim);
DiscreteMeasure ReadMeasureCsv(std::istream& in, int dim);

void SaveMeasureCsv(const std::filesystem::path& path, const DiscreteMeasure& mu,
                    int dim);
DiscreteMeasure LoadMeasureCsv(const std::filesystem::path& path, int dim);

// Directory with manifest.json and level_<i>.csv for i = 0..R.
void SaveLevelMeasures(const std::filesystem::path& dir, const LevelMeasures& lm,
                       const SelfSimilarSystem& system);
// Throws InputError when the manifest names a different system.
LevelMeasures LoadLevelMeasures(const std::filesystem::path& dir,
                                const SelfSimilarSystem& system);

// {"discrete":[{"b":[x(,y)],"r":r,"c":c}...],"c_inf":c,"unit_value":t}
std::string TraceCoefficientsToJson(const TraceCoefficients& tc, int dim);
TraceCoefficients ParseTraceCoefficients(std::string_view text);

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, std::string_view text);

}  // namespace fractrace
