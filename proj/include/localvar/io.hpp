#pragma once

#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <string>
#include <vector>

#include "localvar/fevd.hpp"
#include "localvar/panel.hpp"
#include "localvar/var.hpp"

namespace localvar {

/// Read a monthly (YYYY-MM / YYYY-MM-DD) or integer-indexed CSV panel.
/// Rows are sorted by date; gaps and duplicate dates are rejected. An empty
/// column selection keeps every data column in file order.
TimeSeriesPanel ingest_csv(const std::string& path,
                           const std::vector<std::string>& columns = {});

/// {d, p, intercept, lags, sigma} with row-major matrices.
nlohmann::json params_to_json(const VarParams& params);
VarParams params_from_json(const nlohmann::json& j);

void save_params(const VarParams& params, const std::string& path);
VarParams load_params(const std::string& path);

/// Spillover table as CSV: header, one row per series with a FROM_OTHERS
/// column, and a final TO_OTHERS row.
std::string spillover_table_csv(const SpilloverTable& table);

nlohmann::json spillover_table_json(const SpilloverTable& table);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace localvar
