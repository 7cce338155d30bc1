#include "eb/matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

namespace eb::matrix {

Segmentation::Segmentation(int windows) : windows_per_day(windows) {
  if (windows <= 0 || 86400 % windows != 0) {
    throw DataError("segmentation must be a positive divisor of 86400, got " +
                    std::to_string(windows));
  }
}

int BehaviourMatrix::column(Location where, int window) const {
  return static_cast<int>(where) * windows_per_day + window;
}

BehaviourMatrix build_behaviour_matrix(const std::vector<DayTimeline>& timelines,
                                       Segmentation seg) {
  if (timelines.size() < 2) {
    throw DataError("behaviour matrix needs at least 2 days, got " +
                    std::to_string(timelines.size()));
  }
  for (const DayTimeline& tl : timelines) {
    if (tl.person_id != timelines.front().person_id) {
      throw DataError("behaviour matrix mixes persons: '" + timelines.front().person_id +
                      "' and '" + tl.person_id + "'");
    }
  }

  std::vector<std::size_t> order(timelines.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return timelines[a].epoch_day < timelines[b].epoch_day;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (timelines[order[i]].epoch_day == timelines[order[i - 1]].epoch_day) {
      throw DataError("duplicate day " + format_date(timelines[order[i]].epoch_day));
    }
  }

  const int S = seg.windows_per_day;
  const double dt = seg.window_s();
  BehaviourMatrix bm;
  bm.person_id = timelines.front().person_id;
  bm.windows_per_day = S;
  bm.days.reserve(timelines.size());
  bm.presence = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(timelines.size()),
                                      static_cast<Eigen::Index>(S) * kNumLocations);

  for (std::size_t r = 0; r < order.size(); ++r) {
    const DayTimeline& tl = timelines[order[r]];
    bm.days.push_back(tl.epoch_day);
    for (const TimelineSegment& segm : tl.segments) {
      double b = std::clamp(segm.begin_s, 0.0, kSecondsPerDay);
      const double e = std::clamp(segm.end_s, 0.0, kSecondsPerDay);
      const int base = static_cast<int>(segm.where) * S;
      while (b < e) {
        const int w = std::min(static_cast<int>(b / dt), S - 1);
        const double w_end = (w + 1) * dt;
        const double take = std::min(e, w_end) - b;
        bm.presence(static_cast<Eigen::Index>(r), base + w) += take;
        b += take;
        if (take <= 0.0) break;  // guards against zero-length segments
      }
    }
  }
  bm.presence /= dt;
  bm.mean_day = mean_day_of(bm.presence);
  bm.deviations = deviations_of(bm.presence, bm.mean_day);
  return bm;
}

Eigen::VectorXd mean_day_of(const Eigen::MatrixXd& presence) {
  if (presence.rows() == 0) throw DataError("mean day of an empty matrix");
  return presence.colwise().mean();
}

Eigen::MatrixXd deviations_of(const Eigen::MatrixXd& presence, const Eigen::VectorXd& mean_day) {
  if (presence.cols() != mean_day.size()) throw DataError("mean day length mismatch");
  return presence.rowwise() - mean_day.transpose();
}

namespace {

void append_double(std::string& s, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  s.append(buf, res.ptr);
}

}  // namespace

void write_matrix_csv(std::ostream& out, const BehaviourMatrix& bm) {
  const int S = bm.windows_per_day;
  std::string line = "date";
  for (int k = 1; k <= kNumLocations; ++k) {
    for (int n = 0; n < S; ++n) {
      line += ",loc" + std::to_string(k) + "_w" + std::to_string(n);
    }
  }
  out << line << '\n';
  for (Eigen::Index r = 0; r < bm.presence.rows(); ++r) {
    line = format_date(bm.days[static_cast<std::size_t>(r)]);
    for (Eigen::Index c = 0; c < bm.presence.cols(); ++c) {
      line += ',';
      append_double(line, bm.presence(r, c));
    }
    out << line << '\n';
  }
}

BehaviourMatrix read_matrix_csv(std::istream& in, const std::string& person_id) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("matrix csv: empty stream");
  std::size_t cols = std::count(line.begin(), line.end(), ',');
  if (cols == 0 || cols % kNumLocations != 0) {
    throw DataError("matrix csv: bad header '" + line + "'");
  }
  const int S = static_cast<int>(cols) / kNumLocations;

  std::vector<std::int64_t> days;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::size_t pos = line.find(',');
    if (pos == std::string::npos) throw DataError("matrix csv: bad row");
    days.push_back(parse_date(std::string_view(line).substr(0, pos)));
    std::size_t count = 0;
    while (pos != std::string::npos) {
      const std::size_t next = line.find(',', pos + 1);
      const char* b = line.data() + pos + 1;
      const char* e = next == std::string::npos ? line.data() + line.size() : line.data() + next;
      while (e > b && (*(e - 1) == '\r' || *(e - 1) == ' ')) --e;
      double v = 0.0;
      auto res = std::from_chars(b, e, v);
      if (res.ec != std::errc{} || res.ptr != e) throw DataError("matrix csv: bad value");
      values.push_back(v);
      ++count;
      pos = next;
    }
    if (count != cols) throw DataError("matrix csv: row width mismatch");
  }
  if (days.size() < 2) throw DataError("matrix csv: needs at least 2 days");

  BehaviourMatrix bm;
  bm.person_id = person_id;
  bm.windows_per_day = S;
  bm.days = days;
  bm.presence.resize(static_cast<Eigen::Index>(days.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < days.size(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      bm.presence(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          values[r * cols + c];
    }
  }
  bm.mean_day = mean_day_of(bm.presence);
  bm.deviations = deviations_of(bm.presence, bm.mean_day);
  return bm;
}

}  // namespace eb::matrix
