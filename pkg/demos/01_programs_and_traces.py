"""Programs, images, and trace formation.

Parses a small looping guest program, resolves addresses to image-relative
form, and shows how traces are carved out of it: a trace runs from its entry
to the first unconditional transfer, conditionals inside it are extra exits,
and a jump into the middle of cached code starts a fresh trace at the target.
"""

from dime import form_trace, parse_program

P1 = """\
image main 1000
L0: op 1
    op 1
    ndbr L5 0.5
    op 1
    jmp L0
L5: halt
"""

program = parse_program(P1)
print("image:", program.images[0].name, "base:", program.images[0].base)
for ins in program.images[0].instructions:
    print(f"  {ins.addr}: {ins.kind}"
          + (f" -> {ins.target}" if ins.target is not None else ""))

print("\nresolve(1002) ->", program.resolve(1002)[1:], "kind:",
      program.resolve(1002)[0].kind)

print("\ntrace from the loop head:")
t = form_trace(program, 1000, granularity="ctrl")
print(" ", t)
print("  (covers 1000..1004, ends at the jmp; the ndbr at offset 2 is a side exit)")

print("\ntrace from a mid-region jump target:")
print(" ", form_trace(program, 1003))

print("\nsame entry, but 1003 is already a cached trace start of this version:")
print(" ", form_trace(program, 1000, cached_entries={1003}),
      " <- stops right before the cached entry")

print("\ninstrumentation points at granularity 'all':",
      form_trace(program, 1000, granularity="all").points)
