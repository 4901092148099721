"""Registration of the built-in problems."""
from designbench.core import register
from designbench.topopt.problems import Beams2D, HeatConduction2D, ThermoElasticBeams2D

register("beams2d/v0", Beams2D)
register("heatconduction2d/v0", HeatConduction2D)
register("thermoelasticbeams2d/v0", ThermoElasticBeams2D)
from designbench.photonics.problem import Photonics2D

register("photonics2d/v0", Photonics2D)
from designbench.circuits.converter import PowerElectronics

register("powerelectronics/v0", PowerElectronics)
