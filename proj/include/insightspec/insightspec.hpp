#pragma once

#include "insightspec/dataset.hpp"
#include "insightspec/error.hpp"
#include "insightspec/expr.hpp"
#include "insightspec/insight.hpp"
#include "insightspec/knowledge_graph.hpp"
#include "insightspec/persistence.hpp"
#include "insightspec/relationship.hpp"
#include "insightspec/transform.hpp"
#include "insightspec/value.hpp"
#include "insightspec/workspace.hpp"
