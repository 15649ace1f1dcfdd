#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "pathorder/constraint.hpp"
#include "pathorder/pathdata.hpp"

namespace fixtures {

inline pathorder::NetworkConstraint graph(const std::string& edges, bool undirected = false,
                                          bool self_loops = false) {
  std::istringstream in(edges);
  return pathorder::parse_edge_list(in, undirected, self_loops);
}

// a<->b, a<->c
inline pathorder::NetworkConstraint star() { return graph("a,b\na,c\n", true); }

// a->b->c->a
inline pathorder::NetworkConstraint cycle() { return graph("a,b\nb,c\nc,a\n"); }

inline pathorder::PathDataset paths(const std::string& lines, const pathorder::NetworkConstraint& g,
                                    bool freq_column = false) {
  std::istringstream in(lines);
  return pathorder::ingest(in, g, freq_column);
}

// {(a,b) x2, (a,c) x1} on the star
inline pathorder::PathDataset star_paths(const pathorder::NetworkConstraint& g) {
  return paths("a,b\na,b\na,c\n", g);
}

inline pathorder::History nodes(const pathorder::NetworkConstraint& g, std::initializer_list<const char*> labels) {
  pathorder::History h;
  for (const char* l : labels) h.push_back(g.index_of(l));
  return h;
}

}  // namespace fixtures
