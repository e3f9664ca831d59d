#include "ymh/field_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "ymh/errors.hpp"

namespace ymh {

namespace {

constexpr int kFormatVersion = 1;

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

void put_double(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xffu));
}

double get_double(const std::string& in, std::size_t& pos) {
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
  pos += 8;
  return std::bit_cast<double>(bits);
}

void put_complex(std::string& out, Complex z) {
  put_double(out, z.real());
  put_double(out, z.imag());
}

Complex get_complex(const std::string& in, std::size_t& pos) {
  const double re = get_double(in, pos);
  const double im = get_double(in, pos);
  return {re, im};
}

void put_matrix(std::string& out, const Mat& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) put_complex(out, m(r, c));
}

Mat get_matrix(const std::string& in, std::size_t& pos, int n) {
  Mat m(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = get_complex(in, pos);
  return m;
}

}  // namespace

void write_field_dump(const std::filesystem::path& stem, const FieldDump& dump) {
  const HiggsPair& p = dump.pair;
  const LatticeTorus& lat = p.lattice();
  const int n = p.rank;

  std::string bin;
  bin.reserve(lat.sites() * 16 * (2 * n * n + 2 + 2 * n * n));
  for (std::size_t s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < 2; ++mu) put_matrix(bin, p.gauge.link(s, mu));
  for (std::size_t s = 0; s < lat.sites(); ++s)
    for (int mu = 0; mu < 2; ++mu) put_complex(bin, p.twist.link(s, mu));
  for (std::size_t s = 0; s < lat.sites(); ++s) put_matrix(bin, p.higgs.values[s]);
  if (dump.metric)
    for (std::size_t s = 0; s < lat.sites(); ++s) put_matrix(bin, dump.metric->values[s]);

  nlohmann::json h;
  h["format"] = "ymhlab-fields";
  h["version"] = kFormatVersion;
  h["lattice"] = {{"n_sites", lat.n()}, {"volume", lat.volume()}};
  h["rank"] = n;
  h["degree"] = p.degree;
  h["twist_degree"] = p.twist.degree;
  h["seed"] = dump.seed;
  h["has_metric"] = dump.metric.has_value();
  h["encoding"] = "float64-le complex(re,im)";
  h["order"] = "site-major, axis-minor, row-major";
  h["blocks"] = dump.metric ? nlohmann::json{"gauge", "twist", "higgs", "metric"}
                            : nlohmann::json{"gauge", "twist", "higgs"};
  h["payload_bytes"] = bin.size();

  std::ofstream jf(with_ext(stem, ".json"));
  if (!jf) throw FormatError("cannot open " + with_ext(stem, ".json").string() + " for writing");
  jf << h.dump(2) << '\n';
  std::ofstream bf(with_ext(stem, ".bin"), std::ios::binary);
  if (!bf) throw FormatError("cannot open " + with_ext(stem, ".bin").string() + " for writing");
  bf.write(bin.data(), static_cast<std::streamsize>(bin.size()));
  if (!jf || !bf) throw FormatError("write failed for field dump " + stem.string());
}

FieldDump read_field_dump(const std::filesystem::path& stem) {
  std::ifstream jf(with_ext(stem, ".json"));
  if (!jf) throw FormatError("cannot open " + with_ext(stem, ".json").string());
  nlohmann::json h;
  try {
    jf >> h;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field header is not valid JSON: ") + e.what());
  }

  int n_sites = 0, rank = 0, degree = 0, twist_degree = 0;
  double volume = 0.0;
  bool has_metric = false;
  std::uint64_t seed = 0, payload = 0;
  try {
    if (h.at("format").get<std::string>() != "ymhlab-fields") throw FormatError("unknown field dump format");
    if (h.at("version").get<int>() != kFormatVersion) throw FormatError("unsupported field dump version");
    n_sites = h.at("lattice").at("n_sites").get<int>();
    volume = h.at("lattice").at("volume").get<double>();
    rank = h.at("rank").get<int>();
    degree = h.at("degree").get<int>();
    twist_degree = h.at("twist_degree").get<int>();
    seed = h.at("seed").get<std::uint64_t>();
    has_metric = h.at("has_metric").get<bool>();
    payload = h.at("payload_bytes").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field header is missing a key: ") + e.what());
  }
  if (rank < 1 || rank > kMaxRank) throw FormatError("field header rank out of range");

  LatticePtr lat;
  try {
    lat = build_torus(n_sites, volume);
  } catch (const Error& e) {
    throw FormatError(std::string("field header lattice is invalid: ") + e.what());
  }

  std::ifstream bf(with_ext(stem, ".bin"), std::ios::binary);
  if (!bf) throw FormatError("cannot open " + with_ext(stem, ".bin").string());
  const std::string bin((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());
  const std::size_t per_matrix = 16u * static_cast<std::size_t>(rank * rank);
  const std::size_t expected = lat->sites() * (2 * per_matrix + 2 * 16 + per_matrix + (has_metric ? per_matrix : 0));
  if (bin.size() != expected || payload != expected)
    throw FormatError("field payload has " + std::to_string(bin.size()) + " bytes, expected " +
                      std::to_string(expected));

  std::size_t pos = 0;
  MatField links(2 * lat->sites());
  for (auto& u : links) u = get_matrix(bin, pos, rank);
  TwistLineField twist{lat, twist_degree, std::vector<Complex>(2 * lat->sites())};
  for (auto& l : twist.links) l = get_complex(bin, pos);
  HiggsField phi{lat, rank, MatField(lat->sites())};
  for (auto& m : phi.values) m = get_matrix(bin, pos, rank);

  // Links are stored bit-exactly; reject rather than repair a damaged file.
  for (const auto& u : links)
    if (!(unitarity_defect(u) < 1e-10)) throw FormatError("field payload holds a non-unitary link");
  UnitaryGaugeField gauge;
  gauge.lattice = lat;
  gauge.rank = rank;
  gauge.links = std::move(links);

  FieldDump out;
  out.seed = seed;
  try {
    out.pair = make_pair(std::move(gauge), std::move(twist), std::move(phi));
  } catch (const Error& e) {
    throw FormatError(std::string("field payload is inconsistent: ") + e.what());
  }
  if (out.pair.degree != degree) throw FormatError("gauge degree does not match the header");
  if (std::lround(twist_flux(out.pair.twist) / kTwoPi) != twist_degree)
    throw FormatError("twist flux does not match the header");
  if (has_metric) {
    HermitianMetricField h_field{lat, rank, MatField(lat->sites())};
    for (auto& m : h_field.values) m = get_matrix(bin, pos, rank);
    out.metric = std::move(h_field);
  }
  return out;
}

}  // namespace ymh
