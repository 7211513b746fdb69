#pragma once

// JSON and CSV serialization of reports (see docs/report_schema.md).

#include "ellcount/dimension.hpp"
#include "ellcount/fields.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace ellcount::report {

nlohmann::json to_json(const dimension::DimEstimate& est);
nlohmann::json to_json(const dimension::DetGrowth& growth);
nlohmann::json to_json(const dimension::Check& check);
nlohmann::json to_json(const dimension::BoundReport& rep);
nlohmann::json to_json(const EllipticityProfile& profile);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// name,value,bound,margin,tolerance,pass,detail
void write_checks_csv(const std::filesystem::path& path, const std::vector<dimension::Check>& checks);

/// Plot series: ln r against ln det_{D_r0} D_r.
void write_growth_csv(const std::filesystem::path& path, const dimension::DetGrowth& growth);

}  // namespace ellcount::report
