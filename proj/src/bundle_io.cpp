#include "mixsum/bundle_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace mixsum {

using nlohmann::json;

namespace {

[[noreturn]] void line_error(const std::filesystem::path& path, long line,
                             const std::string& message) {
  throw ValidationError(path.string() + ":" + std::to_string(line) + ": " + message);
}

json kernel_to_json(const Kernel& k) {
  switch (k.family()) {
    case KernelFamily::GaussianUni:
      return json{{"mean", k.mean1()}, {"var", k.var1()}};
    case KernelFamily::GaussianMulti: {
      json mean = json::array();
      for (long j = 0; j < k.mean().size(); ++j) mean.push_back(k.mean()[j]);
      json cov = json::array();
      for (long r = 0; r < k.cov().rows(); ++r) {
        json row = json::array();
        for (long c = 0; c < k.cov().cols(); ++c) row.push_back(k.cov()(r, c));
        cov.push_back(row);
      }
      return json{{"mean", mean}, {"cov", cov}};
    }
    case KernelFamily::Beta:
      return json{{"alpha", k.alpha()}, {"beta", k.beta_param()}};
  }
  throw ValidationError("unknown kernel family");
}

Kernel kernel_from_json(const json& j, KernelFamily family) {
  switch (family) {
    case KernelFamily::GaussianUni:
      return Kernel::gaussian(j.at("mean").get<double>(), j.at("var").get<double>());
    case KernelFamily::GaussianMulti: {
      const auto& jm = j.at("mean");
      Vector mean(jm.size());
      for (std::size_t i = 0; i < jm.size(); ++i) mean[i] = jm[i].get<double>();
      const auto& jc = j.at("cov");
      Matrix cov(jc.size(), jc.size());
      for (std::size_t r = 0; r < jc.size(); ++r) {
        if (jc[r].size() != jc.size()) throw ValidationError("cov is not square");
        for (std::size_t c = 0; c < jc[r].size(); ++c) cov(r, c) = jc[r][c].get<double>();
      }
      return Kernel::gaussian(std::move(mean), std::move(cov));
    }
    case KernelFamily::Beta:
      return Kernel::beta(j.at("alpha").get<double>(), j.at("beta").get<double>());
  }
  throw ValidationError("unknown kernel family");
}

struct ParsedLine {
  int m = 0;
  KernelFamily family = KernelFamily::GaussianUni;
  Vector weights;
  std::vector<Kernel> kernels;
  json raw;
};

ParsedLine parse_draw_line(const json& j) {
  ParsedLine out;
  out.raw = j;
  out.m = j.at("m").get<int>();
  out.family = family_from_name(j.at("family").get<std::string>());
  const auto& jw = j.at("weights");
  const auto& jp = j.at("params");
  if (jw.size() != jp.size()) throw ValidationError("weights and params lengths differ");
  out.weights.resize(jw.size());
  for (std::size_t q = 0; q < jw.size(); ++q) out.weights[q] = jw[q].get<double>();
  out.kernels.reserve(jp.size());
  for (const auto& pj : jp) out.kernels.push_back(kernel_from_json(pj, out.family));
  return out;
}

json draw_to_json(const MixtureDraw& draw) {
  json weights = json::array();
  for (long q = 0; q < draw.weights.size(); ++q) weights.push_back(draw.weights[q]);
  json params = json::array();
  for (const Kernel& k : draw.kernels) params.push_back(kernel_to_json(k));
  return json{{"m", draw.draw_index},
              {"family", family_name(draw.family())},
              {"weights", weights},
              {"params", params}};
}

}  // namespace

DrawBundle ingest_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open bundle file " + path.string());
  std::string line;
  long line_no = 0;
  BundleMeta meta;
  bool have_header = false;
  std::vector<MixtureDraw> draws;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      line_error(path, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!have_header) {
      try {
        meta.model = j.at("model").get<std::string>();
        meta.d = j.at("d").get<int>();
        meta.m_count = j.at("M").get<long>();
        meta.seed = j.at("seed").get<std::uint64_t>();
      } catch (const json::exception& e) {
        line_error(path, line_no, std::string("bad header: ") + e.what());
      }
      have_header = true;
      continue;
    }
    try {
      ParsedLine parsed = parse_draw_line(j);
      draws.emplace_back(std::move(parsed.weights), std::move(parsed.kernels), parsed.m);
    } catch (const json::exception& e) {
      line_error(path, line_no, std::string("bad draw: ") + e.what());
    } catch (const ValidationError& e) {
      line_error(path, line_no, e.what());
    } catch (const NumericalError& e) {
      line_error(path, line_no, e.what());
    }
    const MixtureDraw& d = draws.back();
    if (d.dim() != meta.d)
      line_error(path, line_no, "draw dimension " + std::to_string(d.dim()) +
                                    " does not match header d=" + std::to_string(meta.d));
    if (draws.size() > 1 && d.family() != draws.front().family())
      line_error(path, line_no, "mixed kernel families in bundle");
  }
  if (!have_header) throw ValidationError(path.string() + ": missing header line");
  if (draws.empty()) throw ValidationError(path.string() + ": bundle has no draws");
  if (meta.m_count != static_cast<long>(draws.size()))
    throw ValidationError(path.string() + ": header M=" + std::to_string(meta.m_count) +
                          " but file has " + std::to_string(draws.size()) + " draws");
  return DrawBundle(std::move(meta), std::move(draws));
}

void export_bundle(const DrawBundle& bundle, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write bundle file " + path.string());
  json header{{"model", bundle.meta.model},
              {"d", bundle.meta.d},
              {"M", static_cast<long>(bundle.draws.size())},
              {"seed", bundle.meta.seed}};
  out << header.dump() << "\n";
  for (const MixtureDraw& draw : bundle.draws) out << draw_to_json(draw).dump() << "\n";
  if (!out) throw ValidationError("failed while writing " + path.string());
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset read_dataset_csv(const std::filesystem::path& path, bool labeled) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file " + path.string());
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  long line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.empty()) continue;
    if (labeled && fields.size() < 2)
      line_error(path, line_no, "expected at least one feature column plus a label");
    const std::size_t d = labeled ? fields.size() - 1 : fields.size();
    if (width == 0) width = d;
    if (d != width)
      line_error(path, line_no, "row has " + std::to_string(d) + " feature columns, expected " +
                                    std::to_string(width));
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j) {
      const std::string& f = fields[j];
      const char* begin = f.data();
      const char* end = f.data() + f.size();
      while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
      auto [ptr, ec] = std::from_chars(begin, end, row[j]);
      if (ec != std::errc() || ptr != end)
        line_error(path, line_no, "bad numeric field '" + f + "'");
    }
    if (labeled) {
      const std::string& f = fields.back();
      try {
        std::size_t pos = 0;
        labels.push_back(std::stoi(f, &pos));
        if (pos != f.size()) throw std::invalid_argument(f);
      } catch (const std::exception&) {
        line_error(path, line_no, "bad label field '" + f + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": empty dataset");
  Matrix pts(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j) pts(i, j) = rows[i][j];
  return Dataset(std::move(pts), std::move(labels));
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path, bool with_labels) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write dataset file " + path.string());
  const bool labels = with_labels && data.has_labels();
  for (long i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dim(); ++j) {
      if (j) out << ",";
      out << format_double(data.points(i, j));
    }
    if (labels) out << "," << data.labels[i];
    out << "\n";
  }
  if (!out) throw ValidationError("failed while writing " + path.string());
}

void write_summaries(const std::vector<GmmSummary>& summaries, const std::filesystem::path& path,
                     const std::vector<int>* draw_indices) {
  if (draw_indices && draw_indices->size() != summaries.size())
    throw ValidationError("write_summaries: draw index count mismatch");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write summaries file " + path.string());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const GmmSummary& s = summaries[i];
    const int m = draw_indices ? (*draw_indices)[i] : static_cast<int>(i);
    json j = draw_to_json(s.to_mixture(m));
    j["k"] = s.k;
    j["loglik"] = s.loglik;
    out << j.dump() << "\n";
  }
  if (!out) throw ValidationError("failed while writing " + path.string());
}

std::vector<GmmSummary> read_summaries(const std::filesystem::path& path,
                                       std::vector<int>* draw_indices) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open summaries file " + path.string());
  std::vector<GmmSummary> out;
  if (draw_indices) draw_indices->clear();
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      line_error(path, line_no, std::string("malformed JSON: ") + e.what());
    }
    try {
      ParsedLine parsed = parse_draw_line(j);
      if (parsed.family == KernelFamily::Beta)
        throw ValidationError("beta summaries are not supported");
      GmmSummary s;
      s.k = j.at("k").get<int>();
      s.loglik = j.at("loglik").get<double>();
      s.weights = parsed.weights;
      for (const Kernel& k : parsed.kernels) {
        if (k.family() == KernelFamily::GaussianUni) {
          Vector m(1);
          m[0] = k.mean1();
          Matrix c(1, 1);
          c(0, 0) = k.var1();
          s.means.push_back(m);
          s.covariances.push_back(c);
        } else {
          s.means.push_back(k.mean());
          s.covariances.push_back(k.cov());
        }
      }
      if (s.k != static_cast<int>(s.means.size()))
        throw ValidationError("k does not match component count");
      s.validate();
      out.push_back(std::move(s));
      if (draw_indices) draw_indices->push_back(parsed.m);
    } catch (const json::exception& e) {
      line_error(path, line_no, std::string("bad summary: ") + e.what());
    } catch (const ValidationError& e) {
      line_error(path, line_no, e.what());
    }
  }
  if (out.empty()) throw ValidationError(path.string() + ": no summaries found");
  return out;
}

}  // namespace mixsum
