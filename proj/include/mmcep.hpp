/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include "mmcep/config.hpp"
#include "mmcep/engine.hpp"
#include "mmcep/error.hpp"
#include "mmcep/frames.hpp"
#include "mmcep/graph.hpp"
#include "mmcep/metrics.hpp"
#include "mmcep/ontology.hpp"
#include "mmcep/query.hpp"
#include "mmcep/rule_syntax.hpp"
#include "mmcep/rules.hpp"
#include "mmcep/runner.hpp"
#include "mmcep/scenario.hpp"
#include "mmcep/schema_io.hpp"
#include "mmcep/spatial.hpp"
#include "mmcep/temporal.hpp"
#include "mmcep/text.hpp"
#include "mmcep/tracking.hpp"
