#include "localvar/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace localvar {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim whitespace and CR
        auto is_space = [](unsigned char c) { return std::isspace(c); };
        field.erase(field.begin(),
                    std::find_if_not(field.begin(), field.end(), is_space));
        field.erase(std::find_if_not(field.rbegin(), field.rend(), is_space).base(),
                    field.end());
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

// Parses "YYYY-MM" or "YYYY-MM-DD" into a month counter; nullopt otherwise.
std::optional<long> parse_month(const std::string& s) {
    if (s.size() != 7 && s.size() != 10) return std::nullopt;
    if (s[4] != '-') return std::nullopt;
    if (s.size() == 10 && s[7] != '-') return std::nullopt;
    int year = 0, month = 0;
    auto r1 = std::from_chars(s.data(), s.data() + 4, year);
    auto r2 = std::from_chars(s.data() + 5, s.data() + 7, month);
    if (r1.ec != std::errc{} || r2.ec != std::errc{}) return std::nullopt;
    if (month < 1 || month > 12) return std::nullopt;
    return year * 12L + (month - 1);
}

double parse_double(const std::string& s, std::size_t row, std::size_t col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw NonNumeric("non-numeric value '" + s + "' at row " +
                         std::to_string(row) + ", column " +
                         std::to_string(col));
    }
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    if (static_cast<Eigen::Index>(j.size()) != rows) {
        throw ParseError("matrix row count mismatch in JSON");
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError("matrix column count mismatch in JSON");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(i, c) = row.at(c).get<double>();
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TimeSeriesPanel ingest_csv(const std::string& path,
                           const std::vector<std::string>& columns) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty file '" + path + "'");
    }
    const std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2) {
        throw ParseError("need a date column plus at least one data column");
    }

    struct Row {
        long key;  // month counter or integer index
        std::vector<double> vals;
    };
    std::vector<Row> rows;
    bool monthly = false;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(header.size()));
        }
        Row row;
        if (auto m = parse_month(fields[0])) {
            if (!rows.empty() && !monthly) {
                throw ParseError("mixed date and index labels at row " +
                                 std::to_string(line_no));
            }
            monthly = true;
            row.key = *m;
        } else {
            if (monthly) {
                throw ParseError("unparseable date '" + fields[0] + "' at row " +
                                 std::to_string(line_no));
            }
            long idx = 0;
            auto r = std::from_chars(fields[0].data(),
                                     fields[0].data() + fields[0].size(), idx);
            if (r.ec != std::errc{} ||
                r.ptr != fields[0].data() + fields[0].size()) {
                throw ParseError("unparseable date or index '" + fields[0] +
                                 "' at row " + std::to_string(line_no));
            }
            row.key = idx;
        }
        for (std::size_t c = 1; c < fields.size(); ++c) {
            row.vals.push_back(parse_double(fields[c], line_no, c + 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError("no data rows in '" + path + "'");
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.key < b.key; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const long gap = rows[i].key - rows[i - 1].key;
        if (gap == 0) {
            throw ParseError("duplicate date at position " + std::to_string(i));
        }
        if (gap != 1) {
            TimeAxis probe = monthly ? TimeAxis::monthly(
                                           static_cast<int>(rows[i - 1].key / 12),
                                           static_cast<int>(rows[i - 1].key % 12) + 1)
                                     : TimeAxis::index(rows[i - 1].key);
            throw GapError("missing " + probe.label(1) + " (" +
                           std::to_string(gap - 1) + " rows absent after " +
                           probe.label(0) + ")");
        }
    }

    TimeSeriesPanel panel;
    panel.axis = monthly
                     ? TimeAxis::monthly(static_cast<int>(rows[0].key / 12),
                                         static_cast<int>(rows[0].key % 12) + 1)
                     : TimeAxis::index(rows[0].key);
    panel.names.assign(header.begin() + 1, header.end());
    panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(header.size()) - 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].vals.size(); ++c) {
            panel.values(static_cast<Eigen::Index>(i),
                         static_cast<Eigen::Index>(c)) = rows[i].vals[c];
        }
    }
    panel.validate();
    return columns.empty() ? panel : panel.select(columns);
}

nlohmann::json params_to_json(const VarParams& params) {
    nlohmann::json j;
    j["d"] = params.dim();
    j["p"] = params.order();
    j["intercept"] = std::vector<double>(
        params.intercept.data(), params.intercept.data() + params.intercept.size());
    nlohmann::json lags = nlohmann::json::array();
    for (const auto& phi : params.lag_coeffs) {
        lags.push_back(matrix_to_json(phi));
    }
    j["lags"] = std::move(lags);
    j["sigma"] = matrix_to_json(params.noise_cov);
    return j;
}

VarParams params_from_json(const nlohmann::json& j) {
    const Eigen::Index d = j.at("d").get<Eigen::Index>();
    const int p = j.at("p").get<int>();
    VarParams params;
    const auto& ic = j.at("intercept");
    if (static_cast<Eigen::Index>(ic.size()) != d) {
        throw ParseError("intercept length mismatch");
    }
    params.intercept.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        params.intercept(i) = ic.at(i).get<double>();
    }
    const auto& lags = j.at("lags");
    if (static_cast<int>(lags.size()) != p) {
        throw ParseError("lag count mismatch");
    }
    for (const auto& lag : lags) {
        params.lag_coeffs.push_back(matrix_from_json(lag, d, d));
    }
    params.noise_cov = matrix_from_json(j.at("sigma"), d, d);
    params.validate();
    return params;
}

void save_params(const VarParams& params, const std::string& path) {
    write_text_file(path, params_to_json(params).dump(2) + "\n");
}

VarParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path + "'");
    }
    nlohmann::json j;
    in >> j;
    return params_from_json(j);
}

std::string spillover_table_csv(const SpilloverTable& table) {
    const Eigen::Index d = table.normalized.rows();
    std::ostringstream out;
    out.precision(12);
    out << "series";
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << table.names[j];
    out << ",FROM_OTHERS\n";
    for (Eigen::Index i = 0; i < d; ++i) {
        out << table.names[i];
        double from_others = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            out << ',' << table.normalized(i, j);
            if (i != j) from_others += table.normalized(i, j);
        }
        out << ',' << from_others << '\n';
    }
    out << "TO_OTHERS";
    for (Eigen::Index j = 0; j < d; ++j) {
        double to_others = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            if (i != j) to_others += table.normalized(i, j);
        }
        out << ',' << to_others;
    }
    out << ',' << table.total << '\n';
    return out.str();
}

nlohmann::json spillover_table_json(const SpilloverTable& table) {
    nlohmann::json j;
    j["names"] = table.names;
    j["horizon"] = table.horizon;
    j["raw"] = matrix_to_json(table.raw);
    j["normalized"] = matrix_to_json(table.normalized);
    j["total"] = table.total;
    return j;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write '" + path + "'");
    }
    out << content;
}

}  // namespace localvar
