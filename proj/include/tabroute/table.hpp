#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "tabroute/errors.hpp"

namespace tabroute {

// Headers plus row-major cell grid. Every row has exactly headers.size()
// cells; headers are non-empty.
struct Table {
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
    std::string id;

    void validate() const {
        if (headers.empty()) throw input_error("table '" + id + "': headers must be non-empty");
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != headers.size()) {
                throw input_error("table '" + id + "': row " + std::to_string(r) + " has " +
                                  std::to_string(rows[r].size()) + " cells, expected " +
                                  std::to_string(headers.size()));
            }
        }
    }
};

inline Table table_from_json(const nlohmann::json& j) {
    Table t;
    try {
        t.id = j.value("id", std::string{});
        t.headers = j.at("headers").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows")) {
            t.rows.push_back(row.get<std::vector<std::string>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("malformed table JSON: ") + e.what());
    }
    t.validate();
    return t;
}

inline nlohmann::json table_to_json(const Table& t) {
    return nlohmann::json{{"id", t.id}, {"headers", t.headers}, {"rows", t.rows}};
}

// RFC-4180-ish: quoted fields may contain commas, newlines, and doubled
// quotes. First row is the header row.
inline Table table_from_csv(const std::string& content, const std::string& id = {}) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> field_row;
    std::string field;
    bool in_quotes = false;
    std::size_t i = 0;
    auto end_field = [&] {
        field_row.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(field_row));
        field_row.clear();
    };
    while (i < content.size()) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            if (!field.empty() && field.back() == '\r') field.pop_back();
            end_record();
        } else {
            field += c;
        }
        ++i;
    }
    if (in_quotes) throw parse_error("malformed CSV: unterminated quoted field");
    if (!field.empty() || !field_row.empty()) end_record();
    if (records.empty()) throw parse_error("malformed CSV: no header row");

    Table t;
    t.id = id;
    t.headers = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        // tolerate ragged short rows by padding; over-long rows are an error
        auto& row = records[r];
        if (row.size() > t.headers.size()) {
            throw parse_error("malformed CSV: row " + std::to_string(r) + " wider than header");
        }
        row.resize(t.headers.size());
        t.rows.push_back(std::move(row));
    }
    t.validate();
    return t;
}

} // namespace tabroute
