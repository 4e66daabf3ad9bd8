# =============================================================================
# Copyright 2023 Simeon Manolov <s.manolloff@gmail.com>.  All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# =============================================================================

from ..ratmap import map_to_text, preset_catalog


def catalog():
    """One entry per preset map, in catalog order; the rabbit parameter is solved, not tabulated."""
    return [
        {
            "name": name,
            "formula": formula,
            "text": map_to_text(f),
            "degree": f.degree,
            "num": list(f.num.coeffs),
            "den": list(f.den.coeffs),
        }
        for name, (formula, f) in preset_catalog().items()
    ]
