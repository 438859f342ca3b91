#pragma once

#include <string>

namespace fixtures {

// Seven attribute domains and the seven predicates of the grasp-affordance KB.
inline std::string const grasp_schema = R"(# grasp-affordance schema
domain object = {}
domain shape = {cubic, cylindrical, irregular, spherical}
domain texture = {smooth, rough, soft, patterned}
domain material = {plastic, ceramic, metal, glass}
domain category = {container, electronics, tool, toy, kitchenware, stationery, food, clothing}
domain location = {kitchen, office, bathroom, bedroom, garage, livingroom, workshop}
domain affordance = {pour, stack, handover, cut, write, wear, eat, play, call, brush, hammer, hang, contain, sit}
domain region = {1, 2, 3}
predicate hasShape(object, shape)
predicate hasTexture(object, texture)
predicate hasMaterial(object, material)
predicate hasCategory(object, category)
predicate hasLocation(object, location)
predicate hasAffordance(object, affordance)
predicate graspRegion(object, region)
)";

inline std::string const cup_world = R"(world w1
hasShape(cup1, cylindrical)
hasCategory(cup1, container)
hasAffordance(cup1, pour)
graspRegion(cup1, 2)
)";

} // namespace fixtures
