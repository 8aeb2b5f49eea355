#include "sts/learned.hpp"

#include <istream>
#include <sstream>
#include <string>

namespace sts {

std::string serialize(const RegressionModel& model) {
  if (const auto* poly = std::get_if<PolyModel>(&model)) return serialize(*poly) + '\n';
  return serialize(std::get<NNModel>(model));
}

std::string serialize(const LearnedIndex& index) {
  return serialize(index.model) + "eps " + std::to_string(index.eps1) + ' ' + std::to_string(index.eps2) + ' ' +
         std::to_string(index.eps3) + ' ' + std::to_string(index.n) + '\n';
}

ParsedIndex parse_index(std::istream& in) {
  std::string tag;
  const auto start = in.tellg();
  if (!(in >> tag)) throw std::runtime_error("empty model file");
  in.seekg(start);
  ParsedIndex out{PolyModel{}};
  if (tag == "poly") {
    std::string line;
    while (line.empty() && std::getline(in, line)) {
    }
    out.model = parse_poly(line);
  } else if (tag == "nn") {
    out.model = parse_nn(in);
  } else {
    throw std::runtime_error("unknown model record '" + tag + "'");
  }
  if (in >> tag) {
    if (tag != "eps" || !(in >> out.eps1 >> out.eps2 >> out.eps3 >> out.n))
      throw std::runtime_error("malformed 'eps' line in model file");
    out.has_envelope = true;
  }
  return out;
}

}  // namespace sts
