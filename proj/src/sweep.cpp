#include "wgm/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "wgm/errors.hpp"
#include "wgm/modes.hpp"

namespace wgm {

SearchParams search_at(const WaveguideModel& model, double omega) {
  SearchParams s = model.search;
  if (model.cladding_material) {
    const auto n = model.materials.get(*model.cladding_material)
                       .principal_indices(lambda_um_from_omega(omega));
    s.eta_min = std::max(s.eta_min, *std::max_element(n.begin(), n.end()));
  }
  return s;
}

ModeSet solve_at(const WaveguideModel& model, double omega) {
  auto map = std::make_shared<const EpsilonMap>(
      rasterize(model.cross_section, model.materials, model.grid, omega, model.raster));
  OperatorPencil pencil = assemble_operator(map);
  return solve_modes(pencil, search_at(model, omega));
}

namespace {

// Maximum-weight assignment of rows to columns (rows <= cols), O(n^2 m).
// Returns the column of each row.
std::vector<int> hungarian_max(const std::vector<std::vector<double>>& w, int rows, int cols) {
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials-based shortest augmenting path on cost = -w, 1-based.
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> p(cols + 1, 0), way(cols + 1, 0);
  for (int i = 1; i <= rows; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = -w[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_of_row(rows, -1);
  for (int j = 1; j <= cols; ++j)
    if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

std::vector<int> descending_eta_order(const ModeSet& s) {
  std::vector<int> idx(s.modes.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int l, int r) { return s.modes[l].eta > s.modes[r].eta; });
  return idx;
}

}  // namespace

Assignment track_modes(const ModeSet& set_a, const ModeSet& set_b) {
  const int na = static_cast<int>(set_a.modes.size());
  const int nb = static_cast<int>(set_b.modes.size());
  Assignment out;
  out.a_to_b.assign(na, -1);
  out.confidence.assign(na, 0.0);
  if (na == 0 || nb == 0) return out;
  const auto oa = descending_eta_order(set_a), ob = descending_eta_order(set_b);

  // Weights in sorted order; pairs below the confidence floor weigh nothing.
  const bool transpose = na > nb;
  const int rows = transpose ? nb : na, cols = transpose ? na : nb;
  std::vector<std::vector<double>> overlap(na, std::vector<double>(nb, 0.0));
  std::vector<std::vector<double>> w(rows, std::vector<double>(cols, 0.0));
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) {
      const double o = profile_overlap(set_a.modes[oa[a]], set_b.modes[ob[b]]);
      overlap[a][b] = o;
      const double weight = o >= kMinLinkConfidence ? o : 0.0;
      if (transpose) {
        w[b][a] = weight;
      } else {
        w[a][b] = weight;
      }
    }
  const auto match = hungarian_max(w, rows, cols);
  for (int r = 0; r < rows; ++r) {
    const int c = match[r];
    if (c < 0) continue;
    const int a = transpose ? c : r, b = transpose ? r : c;
    if (overlap[a][b] < kMinLinkConfidence) continue;
    out.a_to_b[oa[a]] = ob[b];
    out.confidence[oa[a]] = overlap[a][b];
  }
  return out;
}

namespace {

void check_material_windows(const WaveguideModel& model, double omega) {
  std::set<std::string> used;
  for (const auto& p : model.cross_section.primitives()) used.insert(p.material);
  const double lam = lambda_um_from_omega(omega);
  for (const auto& name : used) {
    const auto& mat = model.materials.get(name);
    if (lam < mat.window_min_um || lam > mat.window_max_um) {
      std::ostringstream msg;
      msg << "sweep wavelength " << lam << " um lies outside the validity window ["
          << mat.window_min_um << ", " << mat.window_max_um << "] um of material '" << name << "'";
      throw ValidationError(msg.str());
    }
  }
}

}  // namespace

SweepResult dispersion_sweep(const WaveguideModel& model, const std::vector<double>& omegas,
                             const SweepOptions& opts) {
  SweepResult out;
  out.omegas = omegas;
  const bool increasing = std::is_sorted(omegas.begin(), omegas.end(), std::less<>{});
  const bool decreasing = std::is_sorted(omegas.begin(), omegas.end(), std::greater<>{});
  if (!increasing && !decreasing) throw ValidationError("sweep frequency grid is not monotone");
  if (decreasing) std::reverse(out.omegas.begin(), out.omegas.end());
  if (std::adjacent_find(out.omegas.begin(), out.omegas.end()) != out.omegas.end())
    throw ValidationError("sweep frequency grid repeats a value");
  for (double w : out.omegas) check_material_windows(model, w);

  const int n = static_cast<int>(out.omegas.size());
  std::vector<std::optional<ModeSet>> sets(n);
  std::vector<std::string> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        sets[i] = solve_at(model, out.omegas[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const int workers = std::clamp(opts.workers, 1, std::max(n, 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Sequential linking over ascending omega.
  std::vector<int> active;  // branch index of each mode of the previous set
  const ModeSet* prev = nullptr;
  int opened = 0;
  auto open_branch = [&] {
    DispersionBranch b;
    b.label = "b" + std::to_string(opened++);
    out.branches.push_back(std::move(b));
    return static_cast<int>(out.branches.size()) - 1;
  };
  for (int i = 0; i < n; ++i) {
    if (!sets[i]) {
      out.failures.push_back({out.omegas[i], errors[i]});
      out.mode_counts.push_back(-1);
      active.clear();
      prev = nullptr;
      continue;
    }
    const ModeSet& cur = *sets[i];
    out.mode_counts.push_back(static_cast<int>(cur.modes.size()));
    std::vector<int> branch_of(cur.modes.size(), -1);
    std::vector<double> link(cur.modes.size(), 0.0);
    if (prev) {
      const Assignment as = track_modes(*prev, cur);
      for (std::size_t a = 0; a < as.a_to_b.size(); ++a)
        if (as.a_to_b[a] >= 0) {
          branch_of[as.a_to_b[a]] = active[a];
          link[as.a_to_b[a]] = as.confidence[a];
        }
    }
    for (int m : descending_eta_order(cur)) {
      if (branch_of[m] < 0) {
        branch_of[m] = open_branch();
      } else {
        out.branches[branch_of[m]].confidence.push_back(link[m]);
      }
      const ModeProfile& p = cur.modes[m];
      out.branches[branch_of[m]].samples.push_back({p.omega, p.k, p.eta, p.xi_e, p.xi_m});
    }
    if (opts.on_solved) opts.on_solved(out.omegas[i], cur);
    active = std::move(branch_of);
    if (i > 0 && sets[i - 1]) sets[i - 1].reset();
    prev = &*sets[i];
  }
  return out;
}

std::string branch_csv(const DispersionBranch& b, const std::string& header_comment) {
  std::ostringstream os;
  if (!header_comment.empty()) os << "# " << header_comment << "\n";
  os << "# branch " << b.label << "\n";
  os << "lambda_um,omega,k,eta,xiE,xiM,confidence\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < b.samples.size(); ++i) {
    const auto& s = b.samples[i];
    os << lambda_um_from_omega(s.omega) << ',' << s.omega << ',' << s.k << ',' << s.eta << ','
       << s.xi_e << ',' << s.xi_m << ',';
    if (i > 0) os << b.confidence[i - 1];
    os << '\n';
  }
  return os.str();
}

DispersionBranch read_branch_csv(const std::string& text, std::string label) {
  DispersionBranch b;
  b.label = std::move(label);
  std::istringstream is(text);
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') {
      const std::string tag = "# branch ";
      if (b.label.empty() && line.rfind(tag, 0) == 0) b.label = line.substr(tag.size());
      continue;
    }
    if (!header) {
      if (line.rfind("lambda_um,omega,k,eta,xiE,xiM", 0) != 0)
        throw ValidationError("branch table: unexpected header '" + line + "'");
      header = true;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 6)
      throw ValidationError("branch table line " + std::to_string(lineno) + ": expected 7 columns");
    try {
      BranchSample s{std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]),
                     std::stod(cells[4]), std::stod(cells[5])};
      if (!b.samples.empty()) {
        if (!(s.omega > b.samples.back().omega))
          throw ValidationError("branch table line " + std::to_string(lineno) +
                                ": omega must increase strictly");
        b.confidence.push_back(cells.size() > 6 && !cells[6].empty() ? std::stod(cells[6]) : 1.0);
      }
      b.samples.push_back(s);
    } catch (const std::logic_error&) {
      throw ValidationError("branch table line " + std::to_string(lineno) + ": malformed number");
    }
  }
  if (!header) throw ValidationError("branch table: missing header row");
  return b;
}

}  // namespace wgm
