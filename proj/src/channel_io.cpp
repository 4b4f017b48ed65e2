#include "chdisguise/channel_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

using nlohmann::json;

Eigen::Index read_real_matrix(const json& rows, Eigen::Index dim, ComplexMatrix& out, bool imag) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != dim) {
    throw ValidationError("channel JSON: matrix must have `dim` rows");
  }
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw ValidationError("channel JSON: matrix rows must have `dim` entries");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) throw ValidationError("channel JSON: matrix entries must be numbers");
      const double v = x.get<double>();
      if (imag) {
        out(r, c).imag(v);
      } else {
        out(r, c).real(v);
      }
    }
  }
  return dim;
}

json matrix_rows(const ComplexMatrix& m, bool imag) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = imag ? m(r, c).imag() : m(r, c).real();
      if (v == 0.0) v = 0.0;  // drop the sign of negative zero
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_canonical(const json& doc, std::string& out) {
  switch (doc.type()) {
    case json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, value] : doc.items()) {  // std::map order: sorted
        if (!first) out += ',';
        first = false;
        out += json(key).dump();
        out += ':';
        write_canonical(value, out);
      }
      out += '}';
      break;
    }
    case json::value_t::array: {
      out += '[';
      bool first = true;
      for (const auto& value : doc) {
        if (!first) out += ',';
        first = false;
        write_canonical(value, out);
      }
      out += ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = doc.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        break;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
      out += buf;
      break;
    }
    default:
      out += doc.dump();
  }
}

}  // namespace

KrausChannel channel_from_json(const nlohmann::json& doc, double tp_tol) {
  if (!doc.is_object()) throw ValidationError("channel JSON: top level must be an object");
  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) {
    throw ValidationError("channel JSON: missing integer `dim`");
  }
  if (!doc.contains("kraus") || !doc["kraus"].is_array() || doc["kraus"].empty()) {
    throw ValidationError("channel JSON: missing non-empty `kraus` list");
  }
  const auto dim = doc["dim"].get<Eigen::Index>();
  if (dim < 2) throw ValidationError("channel JSON: `dim` must be at least 2");

  std::vector<ComplexMatrix> ops;
  for (const auto& entry : doc["kraus"]) {
    if (!entry.is_object() || !entry.contains("re")) {
      throw ValidationError("channel JSON: each Kraus operator needs `re` (and optionally `im`)");
    }
    ComplexMatrix k = ComplexMatrix::Zero(dim, dim);
    read_real_matrix(entry["re"], dim, k, false);
    if (entry.contains("im")) read_real_matrix(entry["im"], dim, k, true);
    ops.push_back(std::move(k));
  }
  KrausChannel ch(std::move(ops));
  const double err = ch.tp_error();
  if (err > tp_tol) {
    std::ostringstream msg;
    msg << "channel JSON: not trace preserving (max |sum K^dagger K - I| = " << err
        << " > " << tp_tol << ")";
    throw ValidationError(msg.str());
  }
  return ch;
}

KrausChannel load_channel(const std::filesystem::path& path, double tp_tol) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open channel file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return channel_from_json(doc, tp_tol);
}

nlohmann::json channel_to_json(const KrausChannel& ch) {
  json kraus = json::array();
  for (const auto& k : ch.kraus_ops()) {
    kraus.push_back({{"re", matrix_rows(k, false)}, {"im", matrix_rows(k, true)}});
  }
  return {{"dim", ch.dim()}, {"kraus", std::move(kraus)}};
}

std::string canonical_json(const nlohmann::json& doc) {
  std::string out;
  write_canonical(doc, out);
  return out;
}

}  // namespace chdisguise
