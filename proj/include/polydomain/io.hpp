#pragma once
/** @file io.hpp
 *  @brief JSON schemas for specs, tuples, series and linear operators, and
 *         the building blocks of machine-readable reports.
 *
 *  Numbers round-trip exactly: serialization uses the shortest decimal that
 *  parses back to the same double, so save(load(x)) is byte-identical.
 *  Loaders validate structure and throw std::runtime_error with the offending
 *  path; semantic validation (admissibility, membership) stays with callers.
 */

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "polydomain/defect.hpp"
#include "polydomain/domain.hpp"
#include "polydomain/series.hpp"
#include "polydomain/spectral.hpp"

namespace polydomain {

using Json = nlohmann::json;

namespace detail {

inline void io_require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error("schema: " + what);
}

inline int io_int(const Json& j, const std::string& what) {
  io_require(j.is_number_integer(), what + " must be an integer");
  return j.get<int>();
}

inline double io_num(const Json& j, const std::string& what) {
  io_require(j.is_number(), what + " must be a number");
  return j.get<double>();
}

inline cplx io_cplx(const Json& j, const std::string& what) {
  io_require(j.is_array() && j.size() == 2, what + " must be [re, im]");
  return {io_num(j[0], what + "[0]"), io_num(j[1], what + "[1]")};
}

inline Word io_word(const Json& j, int arity, const std::string& what) {
  io_require(j.is_array(), what + " must be an array of letters");
  Word w;
  for (std::size_t p = 0; p < j.size(); ++p) {
    const int letter = io_int(j[p], what + " letter");
    io_require(letter >= 1 && letter <= arity, what + ": letter out of range");
    w.push_back(letter);
  }
  return w;
}

}  // namespace detail

inline Json poly_to_json(const FreePoly& q) {
  Json terms = Json::array();
  for (const auto& [w, c] : q.terms) terms.push_back({{"word", w}, {"coeff", c}});
  return terms;
}

inline FreePoly poly_from_json(const Json& j, int arity, const std::string& what) {
  detail::io_require(j.is_array(), what + " must be an array of terms");
  FreePoly q;
  q.arity = arity;
  for (std::size_t p = 0; p < j.size(); ++p) {
    const Json& term = j[p];
    detail::io_require(term.is_object() && term.contains("word") && term.contains("coeff"),
                       what + " term must be {word, coeff}");
    q.terms.emplace_back(detail::io_word(term["word"], arity, what + ".word"),
                         detail::io_num(term["coeff"], what + ".coeff"));
  }
  return q;
}

/// {"k": int, "n": [int], "m": [int], "q": [[{"word": [int], "coeff": num}]]}
inline Json spec_to_json(const DomainSpec& spec) {
  Json j;
  j["k"] = spec.k();
  j["n"] = spec.n;
  j["m"] = spec.m;
  Json q = Json::array();
  for (const auto& poly : spec.q) q.push_back(poly_to_json(poly));
  j["q"] = q;
  return j;
}

inline DomainSpec spec_from_json(const Json& j) {
  detail::io_require(j.is_object(), "spec must be an object");
  for (const char* key : {"k", "n", "m", "q"})
    detail::io_require(j.contains(key), std::string("spec.") + key + " missing");
  const int k = detail::io_int(j["k"], "spec.k");
  detail::io_require(j["n"].is_array() && j["m"].is_array() && j["q"].is_array(),
                     "spec.n/m/q must be arrays");
  detail::io_require(static_cast<int>(j["n"].size()) == k &&
                         static_cast<int>(j["m"].size()) == k &&
                         static_cast<int>(j["q"].size()) == k,
                     "spec.n/m/q must have k entries");
  DomainSpec spec;
  for (int i = 0; i < k; ++i) {
    spec.n.push_back(detail::io_int(j["n"][static_cast<std::size_t>(i)], "spec.n"));
    spec.m.push_back(detail::io_int(j["m"][static_cast<std::size_t>(i)], "spec.m"));
  }
  for (int i = 0; i < k; ++i)
    spec.q.push_back(poly_from_json(j["q"][static_cast<std::size_t>(i)],
                                    spec.n[static_cast<std::size_t>(i)], "spec.q"));
  return spec;
}

/// Row-major [re, im] pairs; shape carried by the caller.
inline Json mat_to_json(const Mat& a) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      data.push_back({a(r, c).real(), a(r, c).imag()});
  return data;
}

inline Mat mat_from_json(const Json& j, std::int64_t rows, std::int64_t cols,
                         const std::string& what) {
  detail::io_require(j.is_array(), what + " must be an array");
  detail::io_require(static_cast<std::int64_t>(j.size()) == rows * cols,
                     what + ": entry count does not match the shape");
  Mat a(rows, cols);
  std::size_t p = 0;
  for (std::int64_t r = 0; r < rows; ++r)
    for (std::int64_t c = 0; c < cols; ++c)
      a(r, c) = detail::io_cplx(j[p++], what + " entry");
  return a;
}

/// {"rows": int, "cols": int, "data": row-major [re, im]} plus optional
/// block descriptors ("block", "in_block", "out_block") owned by the command.
inline Json linop_to_json(const Mat& a) {
  Json j;
  j["rows"] = a.rows();
  j["cols"] = a.cols();
  j["data"] = mat_to_json(a);
  return j;
}

inline Mat linop_from_json(const Json& j, const std::string& what) {
  detail::io_require(j.is_object() && j.contains("rows") && j.contains("cols") &&
                         j.contains("data"),
                     what + " must be {rows, cols, data}");
  const std::int64_t rows = detail::io_int(j["rows"], what + ".rows");
  const std::int64_t cols = detail::io_int(j["cols"], what + ".cols");
  detail::io_require(rows >= 0 && cols >= 0, what + ": negative shape");
  return mat_from_json(j["data"], rows, cols, what + ".data");
}

/// {"dim": h, "T": [[matrix per letter] per factor]}; shapes come from the spec.
inline Json tuple_to_json(const OperatorTuple& t) {
  Json j;
  j["dim"] = t.dim;
  Json factors = Json::array();
  for (const auto& group : t.T) {
    Json letters = Json::array();
    for (const auto& a : group) letters.push_back(mat_to_json(a));
    factors.push_back(letters);
  }
  j["T"] = factors;
  return j;
}

inline OperatorTuple tuple_from_json(const Json& j, const DomainSpec& spec) {
  detail::io_require(j.is_object() && j.contains("dim") && j.contains("T"),
                     "tuple must be {dim, T}");
  OperatorTuple t;
  t.spec = spec;
  t.dim = detail::io_int(j["dim"], "tuple.dim");
  detail::io_require(t.dim >= 1, "tuple.dim must be positive");
  detail::io_require(j["T"].is_array() &&
                         static_cast<int>(j["T"].size()) == spec.k(),
                     "tuple.T must have one group per factor");
  for (int i = 0; i < spec.k(); ++i) {
    const Json& group = j["T"][static_cast<std::size_t>(i)];
    detail::io_require(group.is_array() &&
                           static_cast<int>(group.size()) ==
                               spec.n[static_cast<std::size_t>(i)],
                       "tuple.T group must have one matrix per letter");
    std::vector<Mat> letters;
    for (std::size_t l = 0; l < group.size(); ++l)
      letters.push_back(mat_from_json(group[l], t.dim, t.dim, "tuple.T matrix"));
    t.T.push_back(std::move(letters));
  }
  return t;
}

/// [{"words": [word per factor], "coeff": [re, im]}]; arities from the spec.
inline Json series_to_json(const FreeSeries& s) {
  Json j = Json::array();
  for (const auto& [mw, c] : s.terms) {
    Json words = Json::array();
    for (const auto& w : mw) words.push_back(w);
    j.push_back({{"words", words}, {"coeff", Json::array({c.real(), c.imag()})}});
  }
  return j;
}

inline FreeSeries series_from_json(const Json& j, const std::vector<int>& n) {
  detail::io_require(j.is_array(), "series must be an array of terms");
  FreeSeries s;
  s.n = n;
  for (std::size_t p = 0; p < j.size(); ++p) {
    const Json& term = j[p];
    detail::io_require(term.is_object() && term.contains("words") && term.contains("coeff"),
                       "series term must be {words, coeff}");
    detail::io_require(term["words"].is_array() &&
                           term["words"].size() == n.size(),
                       "series term needs one word per factor");
    MultiWord mw;
    for (std::size_t i = 0; i < n.size(); ++i)
      mw.push_back(detail::io_word(term["words"][i], n[i], "series word"));
    s.terms.emplace_back(std::move(mw), detail::io_cplx(term["coeff"], "series.coeff"));
  }
  return s;
}

inline Json witness_to_json(const Witness& w) {
  Json j;
  j["label"] = w.label;
  j["min_eig"] = w.min_eig;
  j["scale"] = w.scale;
  j["tol"] = w.tol;
  j["ok"] = w.ok;
  return j;
}

inline Json certificate_to_json(const Certificate& c) {
  Json j;
  j["verdict"] = c.verdict;
  j["input_ok"] = c.input_ok;
  j["definitions_agree"] = c.definitions_agree;
  if (!c.reject_reason.empty()) j["reject_reason"] = c.reject_reason;
  j["commutation"] = c.commutation;
  j["comm_tol"] = c.comm_tol;
  Json ws = Json::array();
  for (const auto& w : c.witnesses) ws.push_back(witness_to_json(w));
  j["witnesses"] = ws;
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

inline void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

}  // namespace polydomain
