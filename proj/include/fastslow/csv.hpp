#pragma once

// CSV export. Numbers use 17 significant digits; every file is written to a
// temporary sibling and renamed into place.

#include "fastslow/error.hpp"
#include "fastslow/simulate.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fastslow {

inline std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes `content` to `path` through a temporary file in the same directory.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

/// t,z_1..z_n,norm_z,norm_y_L1,norm_y_L2,norm_y_Linf
inline std::string trajectory_csv(const Trajectory& tr) {
  const std::size_t n = tr.z.empty() ? 0 : static_cast<std::size_t>(tr.z.front().size());
  std::string s = "t";
  for (std::size_t i = 1; i <= n; ++i) s += ",z_" + std::to_string(i);
  s += ",norm_z,norm_y_L1,norm_y_L2,norm_y_Linf\n";
  for (std::size_t k = 0; k < tr.size(); ++k) {
    s += format_g17(tr.times[k]);
    for (std::size_t i = 0; i < n; ++i) s += "," + format_g17(tr.z[k](static_cast<Eigen::Index>(i)));
    s += "," + format_g17(tr.norm_z[k]);
    s += "," + format_g17(tr.norm_y_L1[k]);
    s += "," + format_g17(tr.norm_y_L2[k]);
    s += "," + format_g17(tr.norm_y_Linf[k]);
    s += "\n";
  }
  return s;
}

/// x,y_1..y_m on the uniform grid of the snapshot.
inline std::string profile_csv(const ProfileSnapshot& p) {
  const auto m = p.y.rows();
  const auto K = p.y.cols() - 1;
  std::string s = "x";
  for (Eigen::Index i = 1; i <= m; ++i) s += ",y_" + std::to_string(i);
  s += "\n";
  for (Eigen::Index j = 0; j <= K; ++j) {
    s += format_g17(K > 0 ? static_cast<double>(j) / static_cast<double>(K) : 0.0);
    for (Eigen::Index i = 0; i < m; ++i) s += "," + format_g17(p.y(i, j));
    s += "\n";
  }
  return s;
}

inline std::string profile_file_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "profile_t%.6g.csv", t);
  return buf;
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& tr) {
  write_file_atomic(path, trajectory_csv(tr));
}

/// One profile_t<time>.csv per stored snapshot with a time in `times`
/// (all stored snapshots when `times` is empty).
inline std::vector<std::filesystem::path> write_profile_snapshots(const std::filesystem::path& dir,
                                                                  const Trajectory& tr,
                                                                  const std::vector<double>& times = {}) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const ProfileSnapshot& p) {
    const auto path = dir / profile_file_name(p.t);
    write_file_atomic(path, profile_csv(p));
    written.push_back(path);
  };
  if (times.empty()) {
    for (const auto& p : tr.profiles) emit(p);
  } else {
    for (double t : times)
      if (const auto* p = tr.profile_at(t)) emit(*p);
  }
  return written;
}

}  // namespace fastslow
