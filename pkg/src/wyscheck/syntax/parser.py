"""Recursive-descent parser producing :mod:`wyscheck.syntax.ast` trees.

Operator precedence, loosest first::

    ==>   ||   &&   == != < <= > >= is   ..   + -   * / %   unary   postfix
"""
from __future__ import annotations

from typing import List, Optional, Tuple

from . import ast as A
from .lexer import SyntaxFault, Token, line_starts, tokenize


class ParseError(SyntaxFault):
    pass


COMPARISONS = frozenset({"==", "!=", "<", "<=", ">", ">="})
TYPE_STARTS = frozenset({"null", "bool", "int", "{", "&", "function", "("})
# tokens that may follow ``(T)`` for it to be read as a cast
CAST_FOLLOW = frozenset({"INT", "IDENT", "(", "true", "false", "null", "!", "{"})


class _Backtrack(Exception):
    pass


class Parser:
    def __init__(self, tokens: List[Token], path: str, text: str):
        self.toks = tokens
        self.pos = 0
        self.path = path
        self.lines = text.replace("\r\n", "\n").split("\n")
        self._speculating = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    @property
    def prev(self) -> Token:
        return self.toks[self.pos - 1]

    def at(self, *kinds: str) -> bool:
        return self.tok.kind in kinds

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def accept(self, kind: str) -> Optional[Token]:
        if self.tok.kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str, what: str | None = None) -> Token:
        if self.tok.kind == kind:
            return self.advance()
        self.error(f"expected {what or repr(kind)}, found {self._describe(self.tok)}")

    def _describe(self, t: Token) -> str:
        if t.kind in ("NEWLINE", "INDENT", "DEDENT", "EOF"):
            return {"NEWLINE": "end of line", "INDENT": "indented block",
                    "DEDENT": "end of block", "EOF": "end of file"}[t.kind]
        return repr(t.text)

    def error(self, message: str, tok: Token | None = None):
        if self._speculating:
            raise _Backtrack()
        t = tok or self.tok
        line = self.lines[t.line - 1] if 0 < t.line <= len(self.lines) else ""
        raise ParseError(message, A.Span(self.path, t.line, t.col, max(t.end_col, t.col + 1)), line)

    def span(self, start: Token) -> A.Span:
        end = self.prev
        if end.line == start.line and end.end_col > start.col:
            end_col = end.end_col
        else:
            end_col = len(self.lines[start.line - 1]) + 1 if start.line <= len(self.lines) else start.end_col
        return A.Span(self.path, start.line, start.col, max(end_col, start.col + 1))

    def tok_span(self, t: Token) -> A.Span:
        return A.Span(self.path, t.line, t.col, t.end_col)

    def speculate(self, fn):
        saved = self.pos
        self._speculating += 1
        try:
            return fn()
        except _Backtrack:
            self.pos = saved
            return None
        finally:
            self._speculating -= 1

    # -- declarations -------------------------------------------------------

    def parse_file(self) -> A.SourceFile:
        decls = []
        while not self.at("EOF"):
            if self.accept("NEWLINE"):
                continue
            if self.at("function", "method"):
                decls.append(self.parse_callable())
            elif self.at("type"):
                decls.append(self.parse_type_decl())
            else:
                self.error(f"expected declaration, found {self._describe(self.tok)}")
        return A.SourceFile(self.path, tuple(decls), "\n".join(self.lines), ())

    def parse_callable(self) -> A.FunctionDecl:
        start = self.advance()
        name = self.expect("IDENT", "name").text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pstart = self.tok
                ptype = self.parse_type()
                pname = self.expect("IDENT", "parameter name").text
                params.append(A.Param(ptype, pname, self.span(pstart)))
                if not self.accept(","):
                    break
        self.expect(")")
        returns: List[A.Param] = []
        if self.accept("->"):
            returns = self.parse_returns()
        requires, ensures = [], []
        while self.at("requires", "ensures"):
            kw = self.advance().kind
            (requires if kw == "requires" else ensures).append(self.parse_expr())
        if not (self.accept(":") or self.accept(";")):
            self.error(f"expected ':' to end declaration header, found {self._describe(self.tok)}")
        header = self.span(start)
        body = self.parse_block()
        cls = A.MethodDecl if start.kind == "method" else A.FunctionDecl
        names = [p.name for p in params] + [r.name for r in returns if r.name]
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ParseError(f"duplicate parameter name {sorted(dup)[0]!r}", header, self.lines[start.line - 1])
        return cls(name, tuple(params), tuple(returns), tuple(requires), tuple(ensures), body, header)

    def parse_returns(self) -> List[A.Param]:
        if self.at("("):
            # either a parenthesised return list or a parenthesised type
            start = self.advance()
            out = []
            if not self.at(")"):
                while True:
                    pstart = self.tok
                    rtype = self.parse_type()
                    rname = self.accept("IDENT")
                    out.append(A.Param(rtype, rname.text if rname else None, self.span(pstart)))
                    if not self.accept(","):
                        break
            self.expect(")")
            if self.at("[", "|") and len(out) == 1 and out[0].name is None:
                # e.g. "-> (int|null)[]": continue as a type
                t = self._type_postfix(out[0].type, start)
                t = self._type_union_rest(t, start)
                return [A.Param(t, None, self.span(start))]
            return out
        start = self.tok
        return [A.Param(self.parse_type(), None, self.span(start))]

    def parse_type_decl(self) -> A.TypeDecl:
        start = self.advance()
        name = self.expect("IDENT", "type name").text
        self.expect("is")
        binder = None
        if self.at("("):
            tstart = self.advance()
            inner = self.parse_type()
            b = self.accept("IDENT")
            self.expect(")")
            if b is not None:
                binder = b.text
                underlying = inner
            else:
                underlying = self._type_union_rest(self._type_postfix(inner, tstart), tstart)
        else:
            underlying = self.parse_type()
        wheres = []
        while self.accept("where"):
            wheres.append(self.parse_expr())
        span = self.span(start)
        if not self.at("EOF"):
            self.expect("NEWLINE", "end of line")
        return A.TypeDecl(name, underlying, binder, tuple(wheres), span)

    # -- types --------------------------------------------------------------

    def parse_type(self) -> A.TypeExpr:
        start = self.tok
        first = self.parse_type_postfix()
        return self._type_union_rest(first, start)

    def _type_union_rest(self, first: A.TypeExpr, start: Token) -> A.TypeExpr:
        members = [first]
        while self.at("|"):
            self.advance()
            members.append(self.parse_type_postfix())
        if len(members) == 1:
            return first
        return A.UnionType(tuple(members), self.span(start))

    def parse_type_postfix(self) -> A.TypeExpr:
        start = self.tok
        return self._type_postfix(self.parse_type_primary(), start)

    def _type_postfix(self, t: A.TypeExpr, start: Token) -> A.TypeExpr:
        while self.at("[") and self.peek().kind == "]":
            self.advance()
            self.advance()
            t = A.ArrayType(t, self.span(start))
        return t

    def parse_type_primary(self) -> A.TypeExpr:
        t = self.tok
        if self.accept("null"):
            return A.NullType(self.span(t))
        if self.accept("bool"):
            return A.BoolType(self.span(t))
        if self.accept("int"):
            return A.IntType(self.span(t))
        if self.at("IDENT"):
            self.advance()
            return A.NamedType(t.text, self.span(t))
        if self.accept("&"):
            return A.RefType(self.parse_type_postfix(), self.span(t))
        if self.accept("("):
            inner = self.parse_type()
            self.expect(")")
            return inner
        if self.accept("{"):
            fields: List[Tuple[str, A.TypeExpr]] = []
            is_open = False
            while not self.at("}"):
                if self.accept("..."):
                    is_open = True
                    break
                ftype = self.parse_type()
                fname = self.expect("IDENT", "field name")
                if any(n == fname.text for n, _ in fields):
                    self.error(f"duplicate field {fname.text!r}", fname)
                fields.append((fname.text, ftype))
                if not self.accept(","):
                    break
            self.expect("}")
            return A.RecordType(tuple(fields), is_open, self.span(t))
        if self.accept("function"):
            self.expect("(")
            params = []
            if not self.at(")"):
                params.append(self.parse_type())
                while self.accept(","):
                    params.append(self.parse_type())
            self.expect(")")
            self.expect("->")
            if self.accept("("):
                rets = []
                if not self.at(")"):
                    rets.append(self.parse_type())
                    while self.accept(","):
                        rets.append(self.parse_type())
                self.expect(")")
            else:
                rets = [self.parse_type_postfix()]
            return A.LambdaType(tuple(params), tuple(rets), self.span(t))
        self.error(f"expected type, found {self._describe(t)}")

    # -- statements ---------------------------------------------------------

    def parse_block(self) -> Tuple[A.Stmt, ...]:
        self.expect("NEWLINE", "end of line")
        self.expect("INDENT", "indented block")
        stmts = []
        while not self.at("DEDENT", "EOF"):
            stmts.append(self.parse_stmt())
        self.accept("DEDENT")
        return tuple(stmts)

    def _end_simple(self):
        if self.at("DEDENT", "EOF"):
            return
        self.expect("NEWLINE", "end of line")

    def parse_stmt(self) -> A.Stmt:
        t = self.tok
        if self.accept("return"):
            values = []
            if not self.at("NEWLINE", "DEDENT", "EOF"):
                values.append(self.parse_expr())
                while self.accept(","):
                    values.append(self.parse_expr())
            stmt = A.Return(tuple(values), self.span(t))
            self._end_simple()
            return stmt
        if self.at("if"):
            return self.parse_if()
        if self.accept("while"):
            cond = self.parse_expr()
            invariants = []
            while self.accept("where"):
                invariants.append(self.parse_expr())
            self.expect(":")
            span = self.span(t)
            return A.While(cond, tuple(invariants), self.parse_block(), span)
        if self.accept("assert"):
            stmt = A.Assert(self.parse_expr(), self.span(t))
            self._end_simple()
            return stmt
        if self.at("*"):
            self.advance()
            target = self.parse_unary()
            self.expect("=")
            stmt = A.DerefAssign(target, self.parse_expr(), self.span(t))
            self._end_simple()
            return stmt
        decl = None
        if self.at(*TYPE_STARTS) or self.at("IDENT"):
            decl = self.speculate(self._var_decl)
        if decl is not None:
            self._end_simple()
            return decl
        expr = self.parse_expr()
        if self.accept("="):
            if not _is_lvalue(expr):
                self.error("invalid assignment target", t)
            stmt = A.Assign(expr, self.parse_expr(), self.span(t))
        else:
            if not isinstance(expr, A.Call):
                self.error("expression statement must be a call", t)
            stmt = A.ExprStmt(expr, self.span(t))
        self._end_simple()
        return stmt

    def _var_decl(self) -> A.VarDecl:
        t = self.tok
        vtype = self.parse_type()
        name = self.expect("IDENT").text
        if self.accept("="):
            init = self.parse_expr()
        elif self.at("NEWLINE", "DEDENT", "EOF"):
            init = None
        else:
            self.error("expected '=' in variable declaration")
        return A.VarDecl(vtype, name, init, self.span(t))

    def parse_if(self) -> A.If:
        t = self.expect("if")
        cond = self.parse_expr()
        self.expect(":")
        span = self.span(t)
        then = self.parse_block()
        orelse: Tuple[A.Stmt, ...] = ()
        if self.accept("else"):
            if self.at("if"):
                orelse = (self.parse_if(),)
            else:
                self.expect(":")
                orelse = self.parse_block()
        return A.If(cond, then, orelse, span)

    # -- expressions --------------------------------------------------------

    def parse_expr(self) -> A.Expr:
        return self.parse_implies()

    def _binary(self, op_tok: Token, left, right, start: Token) -> A.Binary:
        return A.Binary(op_tok.kind, left, right, self.span(start), self.tok_span(op_tok))

    def parse_implies(self) -> A.Expr:
        start = self.tok
        left = self.parse_or()
        if self.at("==>"):
            op = self.advance()
            right = self.parse_implies()
            return self._binary(op, left, right, start)
        return left

    def parse_or(self) -> A.Expr:
        start = self.tok
        left = self.parse_and()
        while self.at("||"):
            op = self.advance()
            left = self._binary(op, left, self.parse_and(), start)
        return left

    def parse_and(self) -> A.Expr:
        start = self.tok
        left = self.parse_cmp()
        while self.at("&&"):
            op = self.advance()
            left = self._binary(op, left, self.parse_cmp(), start)
        return left

    def parse_cmp(self) -> A.Expr:
        start = self.tok
        left = self.parse_range()
        while True:
            if self.tok.kind in COMPARISONS:
                op = self.advance()
                left = self._binary(op, left, self.parse_range(), start)
            elif self.accept("is"):
                left = A.Is(left, self.parse_type(), self.span(start))
            else:
                return left

    def parse_range(self) -> A.Expr:
        start = self.tok
        left = self.parse_add()
        if self.accept(".."):
            return A.Range(left, self.parse_add(), self.span(start))
        return left

    def parse_add(self) -> A.Expr:
        start = self.tok
        left = self.parse_mul()
        while self.at("+", "-"):
            op = self.advance()
            left = self._binary(op, left, self.parse_mul(), start)
        return left

    def parse_mul(self) -> A.Expr:
        start = self.tok
        left = self.parse_unary()
        while self.at("*", "/", "%"):
            op = self.advance()
            left = self._binary(op, left, self.parse_unary(), start)
        return left

    def parse_unary(self) -> A.Expr:
        t = self.tok
        if self.accept("!"):
            return A.Unary("!", self.parse_unary(), self.span(t))
        if self.accept("-"):
            if self.at("INT") and self.peek().kind not in ("[", "."):
                lit = self.advance()
                return A.IntLit(-lit.value, self.span(t))
            return A.Unary("-", self.parse_unary(), self.span(t))
        if self.accept("*"):
            return A.Deref(self.parse_unary(), self.span(t))
        if self.accept("new"):
            return A.New(self.parse_unary(), self.span(t))
        if self.at("("):
            cast = self.speculate(self._cast)
            if cast is not None:
                return cast
        return self.parse_postfix()

    def _cast(self) -> A.Cast:
        t = self.expect("(")
        ctype = self.parse_type()
        self.expect(")")
        if self.tok.kind not in CAST_FOLLOW:
            self.error("not a cast")
        return A.Cast(ctype, self.parse_unary(), self.span(t))

    def parse_postfix(self) -> A.Expr:
        start = self.tok
        e = self.parse_primary()
        while True:
            if self.accept("["):
                idx = self.parse_expr()
                self.expect("]")
                e = A.Index(e, idx, self.span(start))
            elif self.accept("."):
                name = self.expect("IDENT", "field name").text
                e = A.FieldAccess(e, name, self.span(start))
            else:
                return e

    def _args(self) -> Tuple[A.Expr, ...]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.parse_expr())
            while self.accept(","):
                args.append(self.parse_expr())
        self.expect(")")
        return tuple(args)

    def parse_primary(self) -> A.Expr:
        t = self.tok
        if self.at("INT"):
            self.advance()
            return A.IntLit(t.value, self.span(t))
        if self.accept("true"):
            return A.BoolLit(True, self.span(t))
        if self.accept("false"):
            return A.BoolLit(False, self.span(t))
        if self.accept("null"):
            return A.NullLit(self.span(t))
        if self.at("IDENT"):
            self.advance()
            if self.at("("):
                args = self._args()
                return A.Call(t.text, args, self.span(t))
            return A.Var(t.text, self.span(t))
        if self.accept("("):
            e = self.parse_expr()
            self.expect(")")
            return e
        if self.accept("|"):
            e = self.parse_expr()
            self.expect("|", "'|' closing length")
            return A.Length(e, self.span(t))
        if self.accept("["):
            if self.accept("]"):
                return A.ArrayLit((), self.span(t))
            first = self.parse_expr()
            if self.accept(";"):
                length = self.parse_expr()
                self.expect("]")
                return A.ArrayGen(first, length, self.span(t))
            items = [first]
            while self.accept(","):
                items.append(self.parse_expr())
            self.expect("]")
            return A.ArrayLit(tuple(items), self.span(t))
        if self.at("all", "some"):
            kw = self.advance()
            self.expect("{")
            var = self.expect("IDENT", "quantified variable").text
            self.expect("in")
            rstart = self.tok
            lo = self.parse_add()
            self.expect("..")
            hi = self.parse_add()
            rng = A.Range(lo, hi, self.span(rstart))
            self.expect("|")
            body = self.parse_expr()
            self.expect("}")
            return A.Quantifier(kw.kind, var, rng, body, self.span(t), self.tok_span(kw))
        if self.accept("{"):
            fields: List[Tuple[str, A.Expr]] = []
            while not self.at("}"):
                fname = self.expect("IDENT", "field name")
                if any(n == fname.text for n, _ in fields):
                    self.error(f"duplicate field {fname.text!r}", fname)
                self.expect(":")
                fields.append((fname.text, self.parse_expr()))
                if not self.accept(","):
                    break
            self.expect("}")
            return A.RecordLit(tuple(fields), self.span(t))
        self.error(f"expected expression, found {self._describe(t)}")


def _is_lvalue(e: A.Expr) -> bool:
    while isinstance(e, (A.Index, A.FieldAccess)):
        e = e.target
    return isinstance(e, A.Var)


def parse(text: str, path: str = "<input>") -> A.SourceFile:
    """Parse a whole source file."""
    tokens = tokenize(text, path)
    sf = Parser(tokens, path, text).parse_file()
    return A.SourceFile(path, sf.decls, text, line_starts(text))


def parse_type_text(text: str, path: str = "<type>") -> A.TypeExpr:
    """Parse a standalone type expression such as ``bool[]``."""
    tokens = tokenize(text, path)
    p = Parser(tokens, path, text)
    t = p.parse_type()
    p.accept("NEWLINE")
    if not p.at("EOF"):
        p.error(f"unexpected {p._describe(p.tok)} after type")
    return t


def parse_expr_text(text: str, path: str = "<expr>") -> A.Expr:
    tokens = tokenize(text, path)
    p = Parser(tokens, path, text)
    e = p.parse_expr()
    p.accept("NEWLINE")
    if not p.at("EOF"):
        p.error(f"unexpected {p._describe(p.tok)} after expression")
    return e
