#pragma once

#include <string_view>

// Snapshots of data/stopwords/*.txt and data/contractions.tsv compiled into
// the library so that a model file or CLI run never depends on where the
// data directory lives.
namespace csent::resources {

extern const std::string_view english_stopwords;
extern const std::string_view spanish_stopwords;
extern const std::string_view contraction_table;

}  // namespace csent::resources
