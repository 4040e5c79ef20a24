#include "sgn/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "sgn/errors.hpp"

namespace sgn {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw ShapeError("table row has " + std::to_string(row.size()) + " cells, expected " +
                     std::to_string(columns_.size()));
  }
  rows_.push_back(std::move(row));
}

namespace {

std::string csv_field(const Cell& c) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
      }
      return out + "\"";
    }
    std::string operator()(double d) const { return format_double(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
  };
  return std::visit(Visitor{}, c);
}

nlohmann::json json_field(const Cell& c) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(const std::string& s) const { return s; }
    nlohmann::json operator()(double d) const {
      if (std::isfinite(d)) return d;
      return format_double(d);
    }
    nlohmann::json operator()(std::int64_t i) const { return i; }
  };
  return std::visit(Visitor{}, c);
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
    out += '\n';
  }
  return out;
}

nlohmann::json Table::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) o[columns_[i]] = json_field(row[i]);
    arr.push_back(std::move(o));
  }
  return arr;
}

Cell cell(std::size_t v) { return static_cast<std::int64_t>(v); }
Cell cell(double v) { return v; }
Cell cell(const std::string& v) { return v; }

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

nlohmann::json to_json(const ExperimentReport& r, bool include_curve) {
  nlohmann::json j;
  j["model"] = r.model;
  j["task"] = r.task;
  j["seed"] = r.seed;
  j["parameter_count"] = r.parameter_count;
  j["final_train_mse"] = number(r.final_train_mse);
  j["final_test_rmse"] = number(r.final_test_rmse);
  j["min_test_rmse"] = number(r.min_test_rmse);
  j["min_test_epoch"] = r.min_test_epoch;
  if (include_curve) {
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& e : r.curve) {
      curve.push_back({{"epoch", e.epoch},
                       {"train_loss", number(e.train_loss)},
                       {"test_rmse", std::isnan(e.test_rmse) ? nlohmann::json(nullptr)
                                                             : number(e.test_rmse)}});
    }
    j["curve"] = std::move(curve);
  }
  return j;
}

nlohmann::json to_json(const GradCheckReport& r) {
  return {{"passed", r.passed},
          {"tolerance", r.tolerance},
          {"max_rel_error", number(r.max_rel_error)},
          {"worst_block", r.worst_block},
          {"worst_index", r.worst_index},
          {"worst_analytic", number(r.worst_analytic)},
          {"worst_numeric", number(r.worst_numeric)},
          {"coordinates", r.coordinates}};
}

Table curve_table(const std::vector<ExperimentReport>& reports) {
  Table t({"model", "task", "seed", "epoch", "train_loss", "test_rmse"});
  for (const auto& r : reports) {
    for (const auto& e : r.curve) {
      t.add_row({r.model, r.task, cell(static_cast<std::size_t>(r.seed)), cell(e.epoch),
                 e.train_loss, std::isnan(e.test_rmse) ? Cell{} : Cell{e.test_rmse}});
    }
  }
  return t;
}

Table fit_table(const std::vector<FitCell>& cells) {
  Table t({"model", "task", "seed", "params", "status", "min_test_rmse", "min_test_epoch",
           "final_test_rmse", "final_train_mse"});
  for (const auto& c : cells) {
    if (c.failed) {
      t.add_row({c.model, c.task, cell(static_cast<std::size_t>(c.seed)),
                 cell(c.parameter_count), "failed: " + c.error, {}, {}, {}, {}});
      continue;
    }
    t.add_row({c.model, c.task, cell(static_cast<std::size_t>(c.seed)), cell(c.parameter_count),
               "ok", c.report.min_test_rmse, cell(c.report.min_test_epoch),
               c.report.final_test_rmse, c.report.final_train_mse});
  }
  return t;
}

}  // namespace sgn
