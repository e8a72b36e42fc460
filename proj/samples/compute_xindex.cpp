// Minimal library usage: load the shipped catalog, classify a few citing
// records of one paper and print the pooled X-index.
//
//   ./compute_xindex data/catalogs/core-hci.csv

#include <iostream>

#include "xindex/catalog.hpp"
#include "xindex/metric.hpp"
#include "xindex/pipeline.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: " << argv[0] << " <catalog.csv>\n";
    return 1;
  }
  const auto catalog = xindex::load_catalog(xindex::read_file(argv[1])).catalog;

  const xindex::PaperRef cited{"10.1145/2702123.2702150", "CHI", 2015};
  const char* sources[] = {
      "Proceedings of the 2019 CHI Conference on Human Factors in Computing Systems",
      "Nature Communications",
      "International Journal of Human-Computer Studies",
      "Journal of Medical Internet Research",
      "Computers in Human Behavior",
  };

  std::vector<xindex::FieldLabel> labels;
  for (const char* s : sources) {
    xindex::CitationRecord rec{cited, std::nullopt, {s}, 2019, std::nullopt};
    const auto label = xindex::classify_source(rec, catalog);
    std::cout << (label == xindex::FieldLabel::InField ? "in-field     " : "out-of-field ") << s << "\n";
    labels.push_back(label);
  }
  const auto x = xindex::x_index(labels);
  std::cout << "N=" << x.n_total << " n_in=" << x.n_infield << " X=" << *x.value() << "\n";
}
