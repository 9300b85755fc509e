#include "disent/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>

#include "disent/error.hpp"
#include "disent/rng.hpp"

namespace disent {

std::vector<double> SynthSpec::default_y_shift(std::size_t d_in) {
  std::vector<double> v(d_in, 0.0);
  if (d_in > 0) v[0] = 1.0;
  return v;
}

std::vector<double> SynthSpec::default_s_shift(std::size_t d_in) {
  std::vector<double> v(d_in, 0.0);
  if (d_in > 1) v[1] = 2.0;
  return v;
}

SynthSpec SynthSpec::with_defaults(std::size_t n, std::size_t d_in, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.d_in = d_in;
  spec.seed = seed;
  spec.y_shift = default_y_shift(d_in);
  spec.s_shift = default_s_shift(d_in);
  return spec;
}

void SynthSpec::validate() const {
  if (n == 0) fail(ErrorCode::kParameter, "SynthSpec: n must be positive");
  if (d_in == 0) fail(ErrorCode::kParameter, "SynthSpec: d_in must be positive");
  if (y_shift.size() != d_in || s_shift.size() != d_in) {
    fail(ErrorCode::kParameter, "SynthSpec: y_shift and s_shift must have length d_in");
  }
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    fail(ErrorCode::kParameter, "SynthSpec: correlation must lie in [0, 1]");
  }
  if (!(noise_std > 0.0) || !std::isfinite(noise_std)) {
    fail(ErrorCode::kParameter, "SynthSpec: noise_std must be positive");
  }
}

DatasetSplit generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  LabeledBatch all;
  all.samples = Matrix(spec.n, spec.d_in);
  all.main.resize(spec.n);
  all.sensitive.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const Label y = rng.bernoulli(0.5) ? 1 : 0;
    const Label s = rng.bernoulli(spec.correlation) ? y : static_cast<Label>(1 - y);
    all.main[i] = y;
    all.sensitive[i] = s;
    auto row = all.samples.row(i);
    for (std::size_t j = 0; j < spec.d_in; ++j) {
      row[j] = spec.noise_std * rng.normal() + y * spec.y_shift[j] + s * spec.s_shift[j];
    }
  }
  // Examples are i.i.d., so contiguous blocks are already a random split.
  const std::size_t n_train = spec.n * 6 / 10;
  const std::size_t n_test = spec.n * 2 / 10;
  auto range = [](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx;
    for (std::size_t i = begin; i < end; ++i) idx.push_back(i);
    return idx;
  };
  return {subset(all, range(0, n_train)), subset(all, range(n_train, n_train + n_test)),
          subset(all, range(n_train + n_test, spec.n))};
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line,
                              const std::string& what) {
  fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

LabeledBatch read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::kIo, "read_csv: cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) parse_error(path, 1, "missing header");
  const auto header = split_fields(trim(line));
  if (header.size() < 3 || trim(header[header.size() - 2]) != "y" || trim(header.back()) != "s") {
    parse_error(path, 1, "header must be f0,...,f{d-1},y,s");
  }
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j) {
    if (trim(header[j]) != "f" + std::to_string(j)) {
      parse_error(path, 1, "expected column f" + std::to_string(j));
    }
  }

  std::vector<double> values;
  LabeledBatch batch;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_fields(row);
    if (fields.size() != d + 2) {
      parse_error(path, line_no, "expected " + std::to_string(d + 2) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < d; ++j) {
      const std::string_view f = trim(fields[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        parse_error(path, line_no, "bad number in column f" + std::to_string(j));
      }
      values.push_back(v);
    }
    for (std::size_t k = 0; k < 2; ++k) {
      const std::string_view f = trim(fields[d + k]);
      if (f != "0" && f != "1") {
        parse_error(path, line_no, std::string("label ") + (k == 0 ? "y" : "s") +
                                       " must be 0 or 1, got '" + std::string(f) + "'");
      }
      (k == 0 ? batch.main : batch.sensitive).push_back(f == "1" ? 1 : 0);
    }
  }
  if (batch.main.empty()) fail(ErrorCode::kParse, "read_csv: " + path.string() + " has no data rows");
  batch.samples = Matrix(batch.main.size(), d, std::move(values));
  return batch;
}

void write_csv(const LabeledBatch& batch, const std::filesystem::path& path) {
  batch.validate();
  std::ofstream os(path, std::ios::trunc);
  if (!os) fail(ErrorCode::kIo, "write_csv: cannot open " + path.string());
  const std::size_t d = batch.samples.cols();
  for (std::size_t j = 0; j < d; ++j) os << 'f' << j << ',';
  os << "y,s\n";
  char buf[32];
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto row = batch.samples.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      os << buf << ',';
    }
    os << int{batch.main[i]} << ',' << int{batch.sensitive[i]} << '\n';
  }
  if (!os) fail(ErrorCode::kIo, "write_csv: write failed for " + path.string());
}

}  // namespace disent
