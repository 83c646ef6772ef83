#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "harness/harness.hpp"

namespace beamsense::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

void write_history_csv(const predictor::History& history, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw core::IoError("cannot write " + path);
  out << "epoch,split,loss,top1,top5,top10\n";
  for (const auto& row : history) {
    out << row.epoch << ',' << row.split << ',' << fmt_double(row.loss) << ','
        << fmt_double(row.top1) << ',' << fmt_double(row.top5) << ',' << fmt_double(row.top10)
        << "\n";
  }
}

predictor::History read_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw core::IoError("cannot read " + path);
  predictor::History history;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    predictor::HistoryRow row;
    std::getline(ss, field, ',');
    row.epoch = std::stoi(field);
    std::getline(ss, row.split, ',');
    std::getline(ss, field, ',');
    row.loss = std::stod(field);
    std::getline(ss, field, ',');
    row.top1 = std::stod(field);
    std::getline(ss, field, ',');
    row.top5 = std::stod(field);
    std::getline(ss, field, ',');
    row.top10 = std::stod(field);
    history.push_back(row);
  }
  return history;
}

}  // namespace

void emit_report(const RunReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json summary;
  summary["speedup"] = report.speedup;
  json arms = json::array();
  for (const auto& arm : report.arms) {
    fs::create_directories(out_dir + "/" + arm.name);
    write_history_csv(arm.history, out_dir + "/" + arm.name + "/history.csv");
    json a;
    a["name"] = arm.name;
    a["final_loss"] = arm.final_test.loss;
    a["final_top1"] = arm.final_test.top1;
    a["final_top5"] = arm.final_test.top5;
    a["final_top10"] = arm.final_test.top10;
    a["threshold"] = arm.threshold;
    a["epochs_to_threshold"] = arm.epochs_to_threshold;
    arms.push_back(a);
  }
  summary["arms"] = arms;
  std::ofstream out(out_dir + "/summary.json");
  if (!out) throw core::IoError("cannot write summary.json under " + out_dir);
  out << summary.dump(2) << "\n";
}

RunReport parse_report(const std::string& out_dir) {
  std::ifstream in(out_dir + "/summary.json");
  if (!in) throw core::IoError("cannot read summary.json under " + out_dir);
  const json summary = json::parse(in);

  RunReport report;
  report.speedup = summary.at("speedup");
  for (const auto& a : summary.at("arms")) {
    ArmReport arm;
    arm.name = a.at("name");
    arm.final_test.loss = a.at("final_loss");
    arm.final_test.top1 = a.at("final_top1");
    arm.final_test.top5 = a.at("final_top5");
    arm.final_test.top10 = a.at("final_top10");
    arm.threshold = a.at("threshold");
    arm.epochs_to_threshold = a.at("epochs_to_threshold");
    arm.history = read_history_csv(out_dir + "/" + arm.name + "/history.csv");
    report.arms.push_back(std::move(arm));
  }
  return report;
}

}  // namespace beamsense::harness
