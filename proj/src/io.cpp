#include "finita/io.hpp"

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "finita/coding.hpp"

namespace finita {

using nlohmann::json;

namespace {

int get_int(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw Error(Errc::InvalidArgument, std::string("missing integer field '") + key + "'");
  }
  return j.at(key).get<int>();
}

const json& get_array(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(Errc::InvalidArgument, std::string("missing array field '") + key + "'");
  }
  return j.at(key);
}

json parse(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::Io, std::string("malformed JSON: ") + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return in;
}

std::filesystem::path sidecar(const std::filesystem::path& path) {
  std::filesystem::path s = path;
  s += ".json";
  return s;
}

}  // namespace

json to_json(const JointDistribution& joint) {
  json j;
  j["n"] = joint.n();
  j["q"] = joint.q();
  j["probs"] = std::vector<double>(joint.probs().data(), joint.probs().data() + joint.probs().size());
  return j;
}

json to_json(const WordMapping& m, int n, int q) {
  if (m.size() != word_count(n, q)) throw Error(Errc::SizeMismatch, "mapping size does not match q^n");
  return json{{"n", n}, {"q", q}, {"perm", m.perm()}};
}

JointDistribution distribution_from_json(const json& j, bool renormalize) {
  const int n = get_int(j, "n");
  const int q = get_int(j, "q");
  const json& probs = get_array(j, "probs");
  Eigen::VectorXd p(static_cast<Eigen::Index>(probs.size()));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!probs[i].is_number()) throw Error(Errc::InvalidArgument, "probabilities must be numbers");
    p[static_cast<Eigen::Index>(i)] = probs[i].get<double>();
  }
  if (static_cast<std::size_t>(p.size()) != word_count(n, q)) {
    throw Error(Errc::SizeMismatch, "expected " + std::to_string(word_count(n, q)) + " probabilities");
  }
  return JointDistribution(n, q, std::move(p), renormalize);
}

WordMapping mapping_from_json(const json& j) {
  const int n = get_int(j, "n");
  const int q = get_int(j, "q");
  const json& perm = get_array(j, "perm");
  if (perm.size() != word_count(n, q)) throw Error(Errc::SizeMismatch, "mapping size does not match q^n");
  return WordMapping(perm.get<std::vector<Word>>());
}

JointDistribution read_distribution(std::istream& in, bool renormalize) {
  return distribution_from_json(parse(in), renormalize);
}

JointDistribution read_distribution(const std::filesystem::path& path, bool renormalize) {
  std::ifstream in = open_input(path);
  return read_distribution(in, renormalize);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(std::random_device{}());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error(Errc::Io, "write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(Errc::Io, "cannot move output into " + path.string() + ": " + ec.message());
  }
}

void write_samples(const std::filesystem::path& path, const SampleSet& samples) {
  samples.validate();
  std::ostringstream body;
  for (Word w : samples.words) body << w << '\n';
  write_file_atomic(path, body.str());
  const json meta{{"N", samples.N}, {"n", samples.n}, {"q", samples.q}};
  write_file_atomic(sidecar(path), meta.dump() + "\n");
}

SampleSet read_samples(const std::filesystem::path& path) {
  std::ifstream meta_in = open_input(sidecar(path));
  const json meta = parse(meta_in);
  SampleSet s;
  s.n = get_int(meta, "n");
  s.q = get_int(meta, "q");
  if (!meta.contains("N") || !meta.at("N").is_number_unsigned()) throw Error(Errc::InvalidArgument, "missing field 'N'");
  s.N = meta.at("N").get<std::size_t>();
  std::ifstream in = open_input(path);
  s.words.reserve(s.N);
  std::uint64_t w = 0;
  while (in >> w) {
    if (w > std::numeric_limits<Word>::max()) throw Error(Errc::IndexOutOfRange, "sample word too large");
    s.words.push_back(static_cast<Word>(w));
  }
  if (!in.eof()) throw Error(Errc::Io, "malformed sample file " + path.string());
  s.validate();
  return s;
}

}  // namespace finita
