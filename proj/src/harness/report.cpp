#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "pfnts/classification.hpp"
#include "pfnts/errors.hpp"
#include "pfnts/harness.hpp"

namespace pfnts::harness {

RankTable rank_table(const FinalRegrets& finals) {
  if (finals.empty()) throw ParamError("rank table needs at least one scenario");
  RankTable table;
  std::set<std::string> agents;
  for (const auto& [sc, by_agent] : finals) {
    table.scenarios.push_back(sc);
    for (const auto& [ag, v] : by_agent) agents.insert(ag);
  }
  table.agents.assign(agents.begin(), agents.end());
  if (table.agents.size() < 2) throw ParamError("rank table needs at least two agents");

  std::vector<std::string> gaps;
  for (const auto& sc : table.scenarios) {
    const auto& by_agent = finals.at(sc);
    for (const auto& ag : table.agents) {
      auto it = by_agent.find(ag);
      if (it == by_agent.end() || it->second.empty()) gaps.push_back(sc + "/" + ag);
    }
  }
  if (!gaps.empty()) {
    std::string msg = "missing results for";
    for (const auto& g : gaps) msg += " " + g;
    throw IncompleteResults(msg);
  }

  for (const auto& sc : table.scenarios) {
    std::vector<RankRow> rows;
    for (const auto& ag : table.agents) {
      const auto& v = finals.at(sc).at(ag);
      RankRow row{sc, ag, v.size()};
      for (double x : v) row.mean_final += x;
      row.mean_final /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - row.mean_final) * (x - row.mean_final);
      row.sd_final = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      row.se_final = row.sd_final / std::sqrt(static_cast<double>(v.size()));
      rows.push_back(row);
    }
    // midranks
    for (auto& row : rows) {
      double below = 0.0, equal = 0.0;
      for (const auto& other : rows) {
        if (other.mean_final < row.mean_final) below += 1.0;
        else if (other.mean_final == row.mean_final) equal += 1.0;
      }
      row.rank = below + (equal + 1.0) / 2.0;
      table.average_rank[row.agent] += row.rank / static_cast<double>(table.scenarios.size());
    }
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

std::vector<CellResult> read_regret_csv(const std::filesystem::path& path) {
  const auto csv = envs::read_csv(path);
  const std::size_t cs = csv.column("scenario"), ca = csv.column("agent"), cr = csv.column("rep"),
                    ct = csv.column("t"), cv = csv.column("cum_regret");
  std::vector<CellResult> cells;
  std::map<std::tuple<std::string, std::string, std::size_t>, std::size_t> index;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    std::size_t rep = 0, t = 0;
    double v = 0.0;
    try {
      rep = std::stoul(row.at(cr));
      t = std::stoul(row.at(ct));
      v = std::stod(row.at(cv));
    } catch (const std::exception&) {
      throw ParseError(i + 1, "", "malformed regret row");
    }
    auto key = std::make_tuple(row.at(cs), row.at(ca), rep);
    auto [it, fresh] = index.try_emplace(key, cells.size());
    if (fresh) cells.push_back({row.at(cs), row.at(ca), rep, {}});
    auto& cell = cells[it->second];
    if (t != cell.cum_regret.size() + 1) throw ParseError(i + 1, "t", "rounds must be consecutive from 1");
    cell.cum_regret.push_back(v);
  }
  return cells;
}

FinalRegrets read_final_regrets(const std::filesystem::path& regret_csv) {
  FinalRegrets finals;
  for (const auto& c : read_regret_csv(regret_csv)) finals[c.scenario][c.agent].push_back(c.cum_regret.back());
  return finals;
}

void write_rank_table(std::ostream& out, const RankTable& table) {
  out << "agent";
  for (const auto& sc : table.scenarios) out << ',' << sc << "_mean," << sc << "_se," << sc << "_rank";
  out << ",avg_rank\n";
  out << std::setprecision(10);
  for (const auto& ag : table.agents) {
    out << ag;
    for (const auto& sc : table.scenarios) {
      auto it = std::find_if(table.rows.begin(), table.rows.end(),
                             [&](const RankRow& r) { return r.scenario == sc && r.agent == ag; });
      out << ',' << it->mean_final << ',' << it->se_final << ',' << it->rank;
    }
    out << ',' << table.average_rank.at(ag) << '\n';
  }
}

void run_report(const std::filesystem::path& run_dir, const std::filesystem::path& out_dir) {
  const auto regret = run_dir / "regret.csv";
  if (!std::filesystem::exists(regret)) throw ConfigError("no regret.csv in " + run_dir.string());
  const auto cells = read_regret_csv(regret);
  FinalRegrets finals;
  for (const auto& c : cells) finals[c.scenario][c.agent].push_back(c.cum_regret.back());
  const auto table = rank_table(finals);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "rank_table.csv");
  write_rank_table(csv, table);
  write_aggregates(cells, 10, out_dir / "aggregates.json");

  std::cout << std::left << std::setw(16) << "agent";
  for (const auto& sc : table.scenarios) std::cout << std::setw(28) << sc;
  std::cout << "avg rank\n";
  for (const auto& ag : table.agents) {
    std::cout << std::setw(16) << ag;
    for (const auto& r : table.rows) {
      if (r.agent != ag) continue;
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(2) << r.mean_final << " +- " << r.se_final << " (" << r.rank << ")";
      std::cout << std::setw(28) << cell.str();
    }
    std::cout << std::fixed << std::setprecision(2) << table.average_rank.at(ag) << '\n';
  }
}

}  // namespace pfnts::harness
