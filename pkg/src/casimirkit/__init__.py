"""casimirkit: Casimir energies, forces and entropies for boxes, plates and curved bodies.

Modules:

- ``materials``: permittivities on the imaginary frequency axis
- ``boxes``: ideal-metal and Dirichlet rectangular boxes, pistons, ideal plates
- ``lifshitz``: Lifshitz free energy, pressure and entropy of real plates
- ``pfa``: proximity force approximation and beyond-PFA corrections
- ``stats``: experiment-versus-theory comparison
- ``cli``: command-line front end
"""
__version__ = "0.1.0"
