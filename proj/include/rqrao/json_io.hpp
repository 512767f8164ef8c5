#pragma once

#include <json.hpp>

#include "rqrao/graph.hpp"

namespace rqrao {

/// {nodes, edges: [[u, v, w], ...]} with 0-based node ids.
inline nlohmann::ordered_json graph_to_json(const Graph& g) {
    nlohmann::ordered_json j;
    j["nodes"] = g.num_nodes();
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (const Edge& e : g.edges()) edges.push_back({e.u, e.v, e.w});
    j["edges"] = edges;
    return j;
}

inline Graph graph_from_json(const nlohmann::json& j) {
    int n = j.at("nodes").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges"))
        edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    return Graph(n, std::move(edges));
}

} // namespace rqrao
